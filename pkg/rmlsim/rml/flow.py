# stdlib
from typing import Any, Iterable, Optional, Set

# third party
from pydantic import BaseModel, validator

# rmlsim absolute
from rmlsim.exceptions import InvalidEstimate


class FlowEstimate(BaseModel):
    """Handoff flow state sampled at time t.

    N_n = N + N_r - N_t - m with N_r = t_s * arrivals / T_e and
    N_t = t_s * departures / T_e.
    """

    n_current: int = 0
    n_arriving: float = 0.0
    n_departing: float = 0.0
    m_constant: int = 0
    t_s: float = 1.0
    t_e: float = 1.0
    arrivals: int = 0
    departures: int = 0
    n_next: float = 0.0

    @validator("n_current", "m_constant", "arrivals", "departures")
    def _validate_counts(cls: Any, v: int) -> int:
        if v < 0:
            raise ValueError(f"counts must be >= 0, got {v}")
        return v


def flow_estimate(f: FlowEstimate) -> float:
    """Expected population at the next sampling time, clamped at zero."""
    if f.t_e <= 0:
        raise InvalidEstimate(f"estimated time must be > 0, got {f.t_e}")
    n_arriving = f.t_s * f.arrivals / f.t_e
    n_departing = f.t_s * f.departures / f.t_e
    return max(0.0, f.n_current + n_arriving - n_departing - f.m_constant)


class FlowTracker:
    """Tracks the NLOS population between samples and emits flow estimates."""

    def __init__(self, m_constant: int = 0) -> None:
        self.m_constant = m_constant
        self._previous: Optional[Set[int]] = None
        self._last_time: Optional[float] = None

    def sample(self, members: Iterable[int], now: float, t_s: float) -> Optional[FlowEstimate]:
        current = set(members)
        if self._previous is None or self._last_time is None or now <= self._last_time:
            self._previous, self._last_time = current, now
            return None

        estimate = FlowEstimate(
            n_current=len(current),
            m_constant=self.m_constant,
            t_s=t_s,
            t_e=now - self._last_time,
            arrivals=len(current - self._previous),
            departures=len(self._previous - current),
        )
        estimate.n_arriving = estimate.t_s * estimate.arrivals / estimate.t_e
        estimate.n_departing = estimate.t_s * estimate.departures / estimate.t_e
        estimate.n_next = flow_estimate(estimate)

        self._previous, self._last_time = current, now
        return estimate
