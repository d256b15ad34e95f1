# stdlib
import math
from abc import ABCMeta, abstractmethod
from enum import Enum
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Type

# third party
import numpy as np
from pydantic import BaseModel

# rmlsim absolute
import rmlsim.logger as log
from rmlsim.channel.model import ChannelParams, link_success_prob
from rmlsim.rml.metrics import RelayPath
from rmlsim.rml.policy import QPolicy, q_select_action, q_state
from rmlsim.world.geometry import Blockage, BlockageIndex, LinkState, Position, Terrain
from rmlsim.world.mobility import Vehicle


class SelectionMode(str, Enum):
    LEARNED = "learned"
    GREEDY_NEAREST = "greedy"
    BEST_METRIC = "metric"


class WorldSnapshot:
    """Frozen view of the world used for one broadcast.

    Holds vehicle antennas, the blockage volumes (permanent and temporary),
    the BS visibility of every vehicle and the permanent blockage map known
    to the BS.
    """

    def __init__(
        self,
        terrain: Terrain,
        vehicles: Sequence[Vehicle],
        blockages: Sequence[Blockage],
        channel: ChannelParams = ChannelParams(),
        tx_radius_m: Optional[float] = None,
        blockage_map: Optional[Sequence[Position]] = None,
    ) -> None:
        self.terrain = terrain
        self.vehicles = list(vehicles)
        self.blockages = {b.id: b for b in blockages}
        self.channel = channel
        self.tx_radius_m = tx_radius_m
        self.blockage_map = list(blockage_map) if blockage_map is not None else []
        self.index = BlockageIndex(blockages)

        self.ids = np.asarray([v.id for v in self.vehicles], dtype=np.int64)
        self.rows = {int(vid): row for row, vid in enumerate(self.ids)}
        self.antennas = np.asarray([v.antenna() for v in self.vehicles], dtype=float).reshape(-1, 3)

        bs = np.asarray(terrain.bs_antenna(), dtype=float)
        self.bs_distance = np.hypot(
            self.antennas[:, 0] - bs[0], self.antennas[:, 1] - bs[1]
        )
        self.bs_blockers = self.index.first_blockers(
            np.repeat(bs[None, :], len(self.vehicles), axis=0),
            self.antennas,
            np.stack([np.full(len(self.ids), -1), self.ids], axis=1),
        )

    @property
    def los_flags(self) -> np.ndarray:
        return self.bs_blockers < 0

    def vehicle(self, vid: int) -> Vehicle:
        return self.vehicles[self.rows[vid]]

    def nlos_ids(self) -> List[int]:
        return [int(v) for v in self.ids[~self.los_flags]]

    def bs_state(self, vid: int) -> LinkState:
        return LinkState.LOS if self.bs_blockers[self.rows[vid]] < 0 else LinkState.NLOS


class RelayCandidate(NamedTuple):
    relay_id: int
    d_v: float
    d_bs: float
    p_bs_relay: float
    p_relay_target: float

    def path(self, target: int) -> RelayPath:
        return RelayPath(
            nodes=[self.relay_id, target],
            link_probs=[self.p_bs_relay, self.p_relay_target],
        )


class RelayDecision(BaseModel):
    target_nlos_id: int
    chosen_relay_id: Optional[int] = None
    d_v: Optional[float] = None
    d_r: Optional[float] = None
    v_d: float = 0.0
    action_index: Optional[int] = None
    state_index: int = 0
    candidate: Optional[Any] = None
    n_candidates: int = 0


def candidate_relays(snapshot: WorldSnapshot, target: int, max_k: int = 4) -> List[RelayCandidate]:
    """LOS-to-BS vehicles that see the target, nearest first.

    Large vehicles are eligible like any other vehicle. Links with zero
    success probability are pruned.
    """
    t_row = snapshot.rows[target]
    t_xyz = snapshot.antennas[t_row]
    d_v = np.hypot(snapshot.antennas[:, 0] - t_xyz[0], snapshot.antennas[:, 1] - t_xyz[1])

    eligible = snapshot.los_flags.copy()
    if snapshot.tx_radius_m is not None:
        eligible &= d_v <= snapshot.tx_radius_m
    eligible[t_row] = False
    rows = np.flatnonzero(eligible)
    if len(rows) == 0:
        return []

    blockers = snapshot.index.first_blockers(
        snapshot.antennas[rows],
        np.repeat(t_xyz[None, :], len(rows), axis=0),
        np.stack([snapshot.ids[rows], np.full(len(rows), target)], axis=1),
    )
    rows = rows[blockers < 0]

    candidates = []
    for row in rows:
        p_bs = link_success_prob(float(snapshot.bs_distance[row]), LinkState.LOS, snapshot.channel)
        p_rt = link_success_prob(float(d_v[row]), LinkState.LOS, snapshot.channel)
        if p_bs == 0 or p_rt == 0:
            continue
        candidates.append(
            RelayCandidate(
                relay_id=int(snapshot.ids[row]),
                d_v=float(d_v[row]),
                d_bs=float(snapshot.bs_distance[row]),
                p_bs_relay=p_bs,
                p_relay_target=p_rt,
            )
        )
    candidates.sort(key=lambda c: (c.d_v, c.relay_id))
    return candidates[:max_k]


class RelaySelector(metaclass=ABCMeta):
    """Relay selector interface.

    Each derived class implements `name()` and `choose()`, which maps the
    ordered candidate list onto the index of the relay to use.
    """

    @staticmethod
    @abstractmethod
    def name() -> str:
        ...

    @staticmethod
    def type() -> str:
        return "relay_selector"

    @classmethod
    def fqdn(cls) -> str:
        return f"{cls.type()}.{cls.name()}"

    @abstractmethod
    def choose(
        self,
        candidates: List[RelayCandidate],
        state_index: int,
        policy: QPolicy,
        rng: Any,
        explore: bool,
    ) -> int:
        ...


class GreedyNearestSelector(RelaySelector):
    """Distance sweep: the LOS vehicle nearest to the target."""

    @staticmethod
    def name() -> str:
        return SelectionMode.GREEDY_NEAREST.value

    def choose(self, candidates: List[RelayCandidate], *args: Any, **kwargs: Any) -> int:
        return 0


class LearnedSelector(RelaySelector):
    @staticmethod
    def name() -> str:
        return SelectionMode.LEARNED.value

    def choose(
        self,
        candidates: List[RelayCandidate],
        state_index: int,
        policy: QPolicy,
        rng: Any,
        explore: bool,
    ) -> int:
        return q_select_action(policy, state_index, len(candidates), rng, greedy=not explore)


class BestMetricSelector(RelaySelector):
    """Relay path with the largest sum of log link probabilities."""

    @staticmethod
    def name() -> str:
        return SelectionMode.BEST_METRIC.value

    def choose(self, candidates: List[RelayCandidate], *args: Any, **kwargs: Any) -> int:
        metrics = [c.path(-1).metric for c in candidates]
        return int(np.argmax(metrics))


class Selectors:
    _registry: Dict[str, Type[RelaySelector]] = {
        cls.name(): cls for cls in (GreedyNearestSelector, LearnedSelector, BestMetricSelector)
    }

    @classmethod
    def list(cls) -> List[str]:
        return sorted(cls._registry)

    @classmethod
    def get(cls, name: str) -> RelaySelector:
        if name not in cls._registry:
            raise ValueError(f"Selector {name} doesn't exist. Available: {cls.list()}")
        return cls._registry[name]()


def select_relay(
    snapshot: WorldSnapshot,
    target: int,
    policy: QPolicy,
    rng: Any,
    mode: SelectionMode = SelectionMode.LEARNED,
    explore: bool = True,
) -> RelayDecision:
    """Pick the relay for one NLOS target.

    An action index beyond the candidate list falls back to the nearest
    candidate. The chosen relay->target distance becomes the target's
    reference distance.
    """
    vehicle = snapshot.vehicle(target)
    blocker_id = int(snapshot.bs_blockers[snapshot.rows[target]])
    v_d = 0.0
    if blocker_id >= 0:
        center = snapshot.blockages[blocker_id].center
        v_d = math.hypot(vehicle.position.x - center.x, vehicle.position.y - center.y)

    state = q_state(vehicle.position, snapshot.blockage_map, policy, snapshot.terrain)
    candidates = candidate_relays(snapshot, target, max_k=policy.n_actions)
    decision = RelayDecision(
        target_nlos_id=target,
        v_d=v_d,
        state_index=state,
        d_r=policy.best_distance.get(target),
        n_candidates=len(candidates),
    )
    if not candidates:
        return decision

    action = Selectors.get(SelectionMode(mode).value).choose(candidates, state, policy, rng, explore)
    if action >= len(candidates):
        action = 0
    chosen = candidates[action]
    policy.best_distance[target] = chosen.d_v

    decision.chosen_relay_id = chosen.relay_id
    decision.d_v = chosen.d_v
    decision.d_r = chosen.d_v
    decision.action_index = action
    decision.candidate = chosen
    log.debug(
        f"relay for {target}: {chosen.relay_id} (rank {action} of {len(candidates)}, d_v={chosen.d_v:.1f} m)"
    )
    return decision
