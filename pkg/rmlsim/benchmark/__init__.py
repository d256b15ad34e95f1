# stdlib
import time
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

# third party
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel, validate_arguments, validator

# rmlsim absolute
import rmlsim.logger as log
from rmlsim.exceptions import SweepPointFailed
from rmlsim.simulation.config import Mode, ScenarioConfig, build_config, revalidate
from rmlsim.simulation.engine import run_scenario
from rmlsim.simulation.records import MetricsRecord
from rmlsim.utils.serialization import dict_hash, load_from_file, save_to_file

# rmlsim relative
from .scores import RESULT_COLUMNS, ScoreEvaluator  # noqa: F401


class Axis(str, Enum):
    BLOCKAGES = "blockages"
    VEHICLES = "vehicles"


AXIS_FIELD = {
    Axis.BLOCKAGES: "n_blockages",
    Axis.VEHICLES: "n_vehicles",
}

PRESETS: Dict[str, Dict[str, Any]] = {
    # vehicles fixed at 20, blockages varied
    "fig4-6": {"axis": Axis.BLOCKAGES, "values": [2, 4, 6, 8, 10], "fixed_value": 20},
    # blockages fixed at 10, vehicles varied
    "fig7-9": {"axis": Axis.VEHICLES, "values": [10, 20, 30, 40, 50], "fixed_value": 10},
}


class SweepSpec(BaseModel):
    axis: Axis
    values: List[int]
    fixed_value: int
    modes: List[Mode] = [Mode.RML, Mode.BASELINE]
    seeds: List[int] = list(range(10))
    output_dir: Optional[Path] = None

    @validator("values")
    def _validate_values(cls: Any, v: List[int]) -> List[int]:
        if len(v) == 0:
            raise ValueError("a sweep needs at least one axis value")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError(f"axis values must be strictly increasing, got {v}")
        return v

    @validator("seeds")
    def _validate_seeds(cls: Any, v: List[int]) -> List[int]:
        if len(v) == 0:
            raise ValueError("a sweep needs at least one seed")
        return v

    @validator("modes")
    def _validate_modes(cls: Any, v: List[Mode]) -> List[Mode]:
        if len(v) == 0 or len(set(v)) != len(v):
            raise ValueError(f"modes must be nonempty and unique, got {v}")
        return v

    @validator("fixed_value")
    def _validate_fixed(cls: Any, v: int) -> int:
        if v < 0:
            raise ValueError(f"fixed value must be >= 0, got {v}")
        return v

    def fixed_field(self) -> str:
        other = Axis.VEHICLES if self.axis == Axis.BLOCKAGES else Axis.BLOCKAGES
        return AXIS_FIELD[other]

    def points(self) -> List[Tuple[int, Mode, int]]:
        return [(value, mode, seed) for value in self.values for mode in self.modes for seed in self.seeds]


def preset(name: str, seeds: int = 10, output_dir: Optional[Path] = None) -> SweepSpec:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name}, expected one of {sorted(PRESETS)}")
    return SweepSpec(**PRESETS[name], seeds=list(range(seeds)), output_dir=output_dir)


def point_config(base: ScenarioConfig, spec: SweepSpec, value: int, mode: Mode, seed: int) -> ScenarioConfig:
    return revalidate(
        base,
        **{
            AXIS_FIELD[spec.axis]: value,
            spec.fixed_field(): spec.fixed_value,
            "mode": mode,
            "seed": seed,
        },
    )


def _safe_run(
    cfg: ScenarioConfig, workspace: Optional[Path]
) -> Tuple[Optional[MetricsRecord], Optional[BaseException], float]:
    start = time.time()
    cache_file = None
    if workspace is not None:
        cache_file = workspace / f"scenario_{dict_hash(cfg.resolved())}.bkp"
        if cache_file.exists():
            return load_from_file(cache_file), None, 0.0

    log.debug(f" >> scenario seed={cfg.seed} mode={cfg.mode.value}")
    try:
        metrics = run_scenario(cfg).metrics
    except BaseException as e:
        return None, e, float(time.time() - start)

    if cache_file is not None:
        save_to_file(cache_file, metrics)
    return metrics, None, float(time.time() - start)


@validate_arguments(config=dict(arbitrary_types_allowed=True))
def run_sweep(
    spec: SweepSpec,
    base: Optional[ScenarioConfig] = None,
    jobs: int = 1,
    workspace: Optional[Path] = None,
) -> pd.DataFrame:
    """Run every (axis value, mode, seed) point and aggregate over seeds.

    Args:
        spec:
            The sweep grid.
        base:
            Parameters shared by all points. By default, the built-in defaults
            (and `RMLSIM_*` environment overrides).
        jobs:
            Number of scenarios run concurrently.
        workspace:
            Optional cache directory; finished scenarios are reused when the
            same resolved config is requested again.

    Returns one row per (value, mode) with RESULT_COLUMNS. The first failing
    point raises SweepPointFailed.
    """
    base = base if base is not None else build_config()
    if workspace is not None:
        workspace.mkdir(parents=True, exist_ok=True)

    points = spec.points()
    configs = [point_config(base, spec, value, mode, seed) for value, mode, seed in points]
    log.info(f"sweep over {spec.axis.value}: {len(points)} scenarios, {jobs} jobs")

    results = Parallel(n_jobs=jobs)(delayed(_safe_run)(cfg, workspace) for cfg in configs)

    scores = ScoreEvaluator()
    for (value, mode, seed), (metrics, error, duration) in zip(points, results):
        if error is not None or metrics is None:
            log.error(f"[{spec.axis.value}={value}][{mode.value}][seed {seed}] failed: {error}")
            raise SweepPointFailed(spec.axis.value, value, mode.value, seed, error)  # type: ignore
        log.info(f"[{spec.axis.value}={value}][{mode.value}][seed {seed}] pdr={metrics.pdr:.3f}")
        scores.add((spec.axis.value, value, mode.value), metrics, duration)

    log.info(f"sweep done, {scores.duration():.1f}s of scenario time")
    return scores.to_dataframe()
