# stdlib
import math
from typing import Any, Dict, List, Sequence, Tuple

# third party
from pydantic import BaseModel, root_validator

# rmlsim absolute
from rmlsim.exceptions import ZeroProbability


def link_metric(p: float) -> float:
    """Additive link score ln P_V; zero-probability links must be pruned by the caller."""
    if p == 0:
        raise ZeroProbability("a link with zero success probability has no metric")
    if not 0 < p <= 1:
        raise ValueError(f"probability must lie in (0, 1], got {p}")
    return math.log(p)


def path_metric(probs: Sequence[float]) -> Tuple[float, float]:
    """Serial relay path: metric = sum ln p_i, success = prod p_i."""
    if len(probs) == 0:
        raise ValueError("a relay path needs at least one link")
    metric = math.fsum(link_metric(p) for p in probs)
    success = 1.0
    for p in probs:
        success *= p
    return metric, success


class RelayPath(BaseModel):
    nodes: List[int]
    link_probs: List[float]
    metric: float = 0.0
    success: float = 1.0

    @root_validator(pre=True)
    def _derive_metric(cls: Any, values: Dict) -> Dict:
        nodes = values.get("nodes") or []
        probs = values.get("link_probs") or []
        if len(nodes) == 0:
            raise ValueError("relay path needs at least one node")
        if len(probs) != len(nodes):
            raise ValueError(
                f"expected {len(nodes)} link probabilities, got {len(probs)}"
            )
        values["metric"], values["success"] = path_metric(probs)
        return values
