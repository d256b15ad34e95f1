# stdlib
import math
from typing import Any, Dict, List, Sequence

# third party
from pydantic import BaseModel, validator

# rmlsim absolute
import rmlsim.logger as log
from rmlsim.channel.model import SPEED_OF_LIGHT
from rmlsim.world.geometry import Blockage, BlockageClass, Position, Terrain

FEET = 0.3048


class BlockageThreshold(BaseModel):
    """Reflection height separating temporary from permanent blockages (16 ft)."""

    epsilon_height: float = 16 * FEET

    @validator("epsilon_height")
    def _validate_positive(cls: Any, v: float) -> float:
        if v <= 0:
            raise ValueError(f"threshold must be > 0, got {v}")
        return v


def classify_blockage(
    reflected_height: float, thr: BlockageThreshold = BlockageThreshold()
) -> BlockageClass:
    """Reflections above the threshold are buildings, the rest large vehicles."""
    if reflected_height <= 0:
        raise ValueError(f"reflected height must be > 0, got {reflected_height}")
    if reflected_height > thr.epsilon_height:
        return BlockageClass.PERMANENT
    return BlockageClass.TEMPORARY


def estimate_blockage_location(bs: Position, round_trip_s: float, theta: float) -> Position:
    """Radar-style localisation: range c * t / 2 along bearing theta from the BS."""
    if round_trip_s < 0:
        raise ValueError(f"round trip must be >= 0, got {round_trip_s}")
    reach = SPEED_OF_LIGHT * round_trip_s / 2
    return Position(x=bs.x + reach * math.cos(theta), y=bs.y + reach * math.sin(theta))


class MapEntry(BaseModel):
    blockage_id: int
    estimated: Position
    classification: BlockageClass
    sensed_at: float


class BlockageMap:
    """Persistent record of the permanent blockages sensed by the BS.

    Entries survive between refreshes; temporary blockages are only counted
    because they move with their vehicle.
    """

    def __init__(self, thr: BlockageThreshold = BlockageThreshold()) -> None:
        self.thr = thr
        self.entries: Dict[int, MapEntry] = {}
        self.n_temporary = 0
        self.last_refresh = -math.inf

    def refresh(self, terrain: Terrain, blockages: Sequence[Blockage], now: float) -> None:
        bs = terrain.bs_position
        n_temporary = 0
        for blockage in blockages:
            cls = classify_blockage(blockage.height, self.thr)
            if cls == BlockageClass.TEMPORARY:
                n_temporary += 1
                continue
            dx = blockage.center.x - bs.x
            dy = blockage.center.y - bs.y
            round_trip = 2 * math.hypot(dx, dy) / SPEED_OF_LIGHT
            self.entries[blockage.id] = MapEntry(
                blockage_id=blockage.id,
                estimated=estimate_blockage_location(bs, round_trip, math.atan2(dy, dx)),
                classification=cls,
                sensed_at=now,
            )
        self.n_temporary = n_temporary
        self.last_refresh = now
        log.debug(
            f"blockage map at t={now:.2f}s: {len(self.entries)} permanent, {n_temporary} temporary"
        )

    def due(self, now: float, interval: float) -> bool:
        return now - self.last_refresh >= interval - 1e-9

    def permanent_positions(self) -> List[Position]:
        return [self.entries[k].estimated for k in sorted(self.entries)]
