# stdlib
import math
from collections import deque
from pathlib import Path
from typing import Any, Deque, Dict, NamedTuple, Sequence, Union

# third party
import numpy as np
import pandas as pd
from pydantic import BaseModel, validate_arguments, validator

# rmlsim absolute
import rmlsim.logger as log
from rmlsim.exceptions import NoCandidates, ResultsIOError
from rmlsim.utils.serialization import load_from_file, save_to_file
from rmlsim.world.geometry import Position, Terrain

SNAPSHOT_COLUMNS = ["state_index", "action", "q_value"]


class PolicyParams(BaseModel):
    grid_cells_per_side: int = 10
    sector_count: int = 8
    max_candidates: int = 4
    alpha: float = 0.1
    gamma: float = 0.9
    epsilon_explore: float = 0.1
    epsilon_decay: float = 0.995
    epsilon_min: float = 0.01
    replay_capacity: int = 1000
    batch: int = 32
    reset_interval: int = 10000
    latency_penalty: float = 0.1

    @validator("grid_cells_per_side", "sector_count", "max_candidates", "replay_capacity", "reset_interval")
    def _validate_positive(cls: Any, v: int) -> int:
        if v < 1:
            raise ValueError(f"must be >= 1, got {v}")
        return v

    @validator("batch")
    def _validate_batch(cls: Any, v: int) -> int:
        if v < 0:
            raise ValueError(f"must be >= 0, got {v}")
        return v

    @validator("alpha", "epsilon_explore", "epsilon_decay", "epsilon_min")
    def _validate_unit(cls: Any, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"must lie in [0, 1], got {v}")
        return v

    @validator("gamma")
    def _validate_gamma(cls: Any, v: float) -> float:
        if not 0.0 <= v < 1.0:
            raise ValueError(f"discount must lie in [0, 1), got {v}")
        return v


class Transition(NamedTuple):
    state: int
    action: int
    reward: float
    next_state: int
    done: bool


class QPolicy:
    """Tabular relay-selection policy.

    The Q-table maps a state index to one value per candidate rank. A reset
    (every `reset_interval` updates) restores the initial exploration rate
    and keeps the learned values.
    """

    @validate_arguments(config=dict(arbitrary_types_allowed=True))
    def __init__(self, params: PolicyParams = PolicyParams()) -> None:
        self.params = params
        self.q_table: Dict[int, np.ndarray] = {}
        self.epsilon_explore = params.epsilon_explore
        self.replay: Deque[Transition] = deque(maxlen=params.replay_capacity)
        self.update_counter = 0
        self.episodes = 0
        self.resets = 0
        self.best_distance: Dict[int, float] = {}

    @property
    def n_actions(self) -> int:
        return self.params.max_candidates

    def q_row(self, state: int) -> np.ndarray:
        row = self.q_table.get(state)
        if row is None:
            return np.zeros(self.n_actions)
        return row

    def value(self, state: int, action: int) -> float:
        return float(self.q_row(state)[action])

    def greedy_action(self, state: int, n_candidates: int) -> int:
        n = min(n_candidates, self.n_actions)
        return int(np.argmax(self.q_row(state)[:n]))

    def end_episode(self) -> None:
        self.episodes += 1
        self.epsilon_explore = max(
            self.params.epsilon_min, self.epsilon_explore * self.params.epsilon_decay
        )

    def reset_exploration(self) -> None:
        self.epsilon_explore = self.params.epsilon_explore
        self.resets += 1
        log.debug(f"policy reset #{self.resets} after {self.update_counter} updates")

    def _apply(self, t: Transition) -> None:
        row = self.q_table.get(t.state)
        if row is None:
            row = self.q_table[t.state] = np.zeros(self.n_actions)
        future = 0.0 if t.done else self.params.gamma * float(self.q_row(t.next_state).max())
        row[t.action] += self.params.alpha * (t.reward + future - row[t.action])

    def export_snapshot(self, path: Union[str, Path]) -> None:
        """Write the Q-table as (state_index, action, q_value) rows."""
        rows = [
            (state, action, float(value))
            for state in sorted(self.q_table)
            for action, value in enumerate(self.q_table[state])
        ]
        try:
            pd.DataFrame(rows, columns=SNAPSHOT_COLUMNS).to_csv(path, index=False)
        except OSError as e:
            raise ResultsIOError(f"cannot write policy snapshot {path}: {e}") from e

    def import_snapshot(self, path: Union[str, Path]) -> "QPolicy":
        try:
            df = pd.read_csv(path)
        except OSError as e:
            raise ResultsIOError(f"cannot read policy snapshot {path}: {e}") from e
        if list(df.columns) != SNAPSHOT_COLUMNS:
            raise ValueError(f"unexpected snapshot columns {list(df.columns)}")
        self.q_table = {}
        for state, action, value in df.itertuples(index=False):
            if not 0 <= action < self.n_actions:
                raise ValueError(f"action {action} outside [0, {self.n_actions})")
            row = self.q_table.setdefault(int(state), np.zeros(self.n_actions))
            row[int(action)] = float(value)
        return self

    def save_to_file(self, path: Union[str, Path]) -> None:
        save_to_file(path, self)

    @staticmethod
    def load_from_file(path: Union[str, Path]) -> "QPolicy":
        policy = load_from_file(path)
        if not isinstance(policy, QPolicy):
            raise ValueError(f"{path} does not hold a QPolicy")
        return policy


def q_state(
    target_position: Position,
    permanent_blockage_map: Sequence[Position],
    policy: QPolicy,
    terrain: Terrain,
) -> int:
    """Grid cell of the target times the sector occupancy of permanent blockers.

    Sectors are BS-centred, counter-clockwise from due east.
    """
    cells = policy.params.grid_cells_per_side
    sectors = policy.params.sector_count
    col = min(max(int(target_position.x / (terrain.width / cells)), 0), cells - 1)
    row = min(max(int(target_position.y / (terrain.depth / cells)), 0), cells - 1)
    cell_index = row * cells + col

    bs = terrain.bs_position
    bitmap = 0
    for p in permanent_blockage_map:
        angle = math.atan2(p.y - bs.y, p.x - bs.x) % (2 * math.pi)
        bitmap |= 1 << (int(angle / (2 * math.pi / sectors)) % sectors)
    return cell_index * (1 << sectors) + bitmap


def q_select_action(
    policy: QPolicy,
    state_index: int,
    n_candidates: int,
    rng: Any,
    greedy: bool = False,
) -> int:
    """Epsilon-greedy rank selection; ties go to the lowest (nearest) rank."""
    if n_candidates < 1:
        raise NoCandidates("no relay candidate to choose from")
    n = min(n_candidates, policy.n_actions)
    if rng.random() < policy.epsilon_explore and not greedy:
        return int(rng.integers(n))
    return policy.greedy_action(state_index, n)


def q_update(
    policy: QPolicy,
    s: int,
    a: int,
    reward: float,
    s_next: int,
    done: bool,
) -> QPolicy:
    transition = Transition(s, a, reward, s_next, done)
    policy._apply(transition)
    policy.replay.append(transition)
    policy.update_counter += 1
    if policy.update_counter % policy.params.reset_interval == 0:
        policy.reset_exploration()
    return policy


def replay_train(policy: QPolicy, rng: Any) -> QPolicy:
    """Re-apply a uniform batch of stored transitions (without replacement)."""
    n = min(policy.params.batch, len(policy.replay))
    if n == 0:
        return policy
    for idx in rng.choice(len(policy.replay), size=n, replace=False):
        policy._apply(policy.replay[int(idx)])
    return policy


def delivery_reward(delivered: bool, latency_ms: float, params: PolicyParams = PolicyParams()) -> float:
    return (1.0 if delivered else -1.0) - params.latency_penalty * latency_ms


def policy_summary(policy: QPolicy) -> Dict[str, Any]:
    return {
        "states": len(policy.q_table),
        "updates": policy.update_counter,
        "episodes": policy.episodes,
        "resets": policy.resets,
        "epsilon_explore": policy.epsilon_explore,
        "replay": len(policy.replay),
    }
