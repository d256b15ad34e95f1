"""mmWave link abstraction.

Log-distance path loss with a LOS/NLOS exponent and log-normal shadowing. A
link succeeds when the shadowed received power clears the receiver
threshold, so the per-attempt success probability is the normal CDF of the
link margin over the shadowing deviation.
"""
# stdlib
import math
from typing import Any, List, Optional, Sequence, Tuple

# third party
from pydantic import BaseModel, validator
from scipy.special import ndtr

# rmlsim absolute
from rmlsim.world.geometry import LinkState

SPEED_OF_LIGHT = 2.99792458e8


class ChannelParams(BaseModel):
    tx_power_dbm: float = 30.0
    bandwidth_hz: float = 2e8
    carrier_note: str = "28 GHz class"
    pl0_db: float = 61.4
    exponent_los: float = 2.0
    exponent_nlos: float = 3.3
    shadow_sigma_los_db: float = 4.0
    shadow_sigma_nlos_db: float = 8.0
    # thermal noise over 200 MHz with a 7 dB noise figure, plus 5 dB SNR
    rx_threshold_dbm: float = -79.0
    data_rate_bps: float = 1e11
    packet_bytes: int = 1024
    # calibration knob, not a physical timer; sets the baseline mean latency
    # between 0.1 and 1.6 ms
    retry_timeout_ms: float = 2.0
    relay_proc_ms: float = 0.02
    max_retries: int = 3
    queue_capacity: int = 100

    @validator("exponent_los", "exponent_nlos")
    def _validate_exponent(cls: Any, v: float) -> float:
        if v < 1:
            raise ValueError(f"path loss exponent must be >= 1, got {v}")
        return v

    @validator("shadow_sigma_los_db", "shadow_sigma_nlos_db", "retry_timeout_ms", "relay_proc_ms")
    def _validate_non_negative(cls: Any, v: float) -> float:
        if v < 0:
            raise ValueError(f"must be >= 0, got {v}")
        return v

    @validator("bandwidth_hz", "data_rate_bps", "packet_bytes", "queue_capacity")
    def _validate_positive(cls: Any, v: float) -> float:
        if v <= 0:
            raise ValueError(f"must be > 0, got {v}")
        return v

    @validator("max_retries")
    def _validate_retries(cls: Any, v: int) -> int:
        if v < 0:
            raise ValueError(f"must be >= 0, got {v}")
        return v

    def exponent(self, state: LinkState) -> float:
        return self.exponent_los if state == LinkState.LOS else self.exponent_nlos

    def shadow_sigma(self, state: LinkState) -> float:
        return self.shadow_sigma_los_db if state == LinkState.LOS else self.shadow_sigma_nlos_db

    def tx_time_ms(self) -> float:
        return 8.0 * self.packet_bytes / self.data_rate_bps * 1e3


class LinkSample(BaseModel):
    distance: float
    state: LinkState
    success_prob: float

    @validator("success_prob")
    def _validate_prob(cls: Any, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"probability must lie in [0, 1], got {v}")
        return v


def path_loss(d: float, state: LinkState, params: ChannelParams = ChannelParams()) -> float:
    """PL = pl0 + 10 n log10(max(d, 1 m))."""
    if d < 0:
        raise ValueError(f"distance must be >= 0, got {d}")
    return params.pl0_db + 10.0 * params.exponent(state) * math.log10(max(d, 1.0))


def link_margin(d: float, state: LinkState, params: ChannelParams = ChannelParams()) -> float:
    return params.tx_power_dbm - path_loss(d, state, params) - params.rx_threshold_dbm


def link_success_prob(
    d: float, state: LinkState, params: ChannelParams = ChannelParams()
) -> float:
    margin = link_margin(d, state, params)
    sigma = params.shadow_sigma(state)
    if sigma == 0:
        return 1.0 if margin >= 0 else 0.0
    return float(ndtr(margin / sigma))


def sample_link(
    d: float, state: LinkState, params: ChannelParams, rng: Any
) -> bool:
    """One shadowed reception: success iff received power clears the threshold."""
    shadow = float(rng.normal(0.0, params.shadow_sigma(state)))
    received = params.tx_power_dbm - path_loss(d, state, params) - shadow
    return received >= params.rx_threshold_dbm


def describe_link(d: float, state: LinkState, params: ChannelParams = ChannelParams()) -> LinkSample:
    return LinkSample(distance=d, state=state, success_prob=link_success_prob(d, state, params))


def attempt_link(prob: float, max_retries: int, rng: Any) -> Tuple[bool, int]:
    """Bernoulli transmission with up to `max_retries` retransmissions.

    Returns the outcome and the number of retries spent (`max_retries` when
    every attempt failed).
    """
    for attempt in range(max_retries + 1):
        if rng.random() < prob:
            return True, attempt
    return False, max_retries


def link_latency(
    hops: int,
    retries_per_hop: Sequence[int],
    params: ChannelParams = ChannelParams(),
    distances: Optional[Sequence[float]] = None,
) -> float:
    """Delivery latency in milliseconds.

    Each hop costs transmission + propagation + retries * retry_timeout; every
    relay in between adds its processing time.
    """
    if hops < 1:
        raise ValueError(f"hops must be >= 1, got {hops}")
    if len(retries_per_hop) != hops:
        raise ValueError(f"expected {hops} retry counts, got {len(retries_per_hop)}")
    distances_: List[float] = list(distances) if distances is not None else [0.0] * hops
    if len(distances_) != hops:
        raise ValueError(f"expected {hops} hop distances, got {len(distances_)}")

    total = 0.0
    for retries, d in zip(retries_per_hop, distances_):
        total += params.tx_time_ms() + d / SPEED_OF_LIGHT * 1e3 + retries * params.retry_timeout_ms
    return total + (hops - 1) * params.relay_proc_ms
