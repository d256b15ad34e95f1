# stdlib
import math
from enum import Enum
from typing import Any, List, Sequence, Tuple

# third party
from pydantic import BaseModel, validate_arguments, validator

# rmlsim absolute
import rmlsim.logger as log
from rmlsim.exceptions import PlacementFailed
from rmlsim.world.geometry import (
    Blockage,
    BlockageClass,
    Position,
    Terrain,
    segment_hits_footprint,
)

MIN_SPEED = 0.1
MAX_SPEED = 15.0


class VehicleKind(str, Enum):
    CAR = "Car"
    LARGE_VEHICLE = "LargeVehicle"


class SpeedMode(str, Enum):
    CONSTANT = "constant"
    UNIFORM = "uniform"


class MobilityParams(BaseModel):
    speed_mode: SpeedMode = SpeedMode.CONSTANT
    speed: float = 15.0
    min_speed: float = MIN_SPEED
    max_speed: float = MAX_SPEED
    pause_s: float = 5.0
    large_vehicle_fraction: float = 0.2
    car_body_height: float = 1.5
    large_body_height: float = 4.0
    antenna_height: float = 1.5
    max_attempts: int = 10000

    @validator("speed", "min_speed", "max_speed")
    def _validate_speed(cls: Any, v: float) -> float:
        if not MIN_SPEED <= v <= MAX_SPEED:
            raise ValueError(f"speed must lie in [{MIN_SPEED}, {MAX_SPEED}], got {v}")
        return v

    @validator("max_speed")
    def _validate_speed_range(cls: Any, v: float, values: dict) -> float:
        if "min_speed" in values and v < values["min_speed"]:
            raise ValueError("max_speed must be >= min_speed")
        return v

    @validator("pause_s")
    def _validate_pause(cls: Any, v: float) -> float:
        if v < 0:
            raise ValueError(f"pause must be >= 0, got {v}")
        return v

    @validator("large_vehicle_fraction")
    def _validate_fraction(cls: Any, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"fraction must lie in [0, 1], got {v}")
        return v

    @validator("large_body_height")
    def _validate_body_heights(cls: Any, v: float, values: dict) -> float:
        if "car_body_height" in values and v <= values["car_body_height"]:
            raise ValueError("large vehicles must be taller than cars")
        return v


class Vehicle(BaseModel):
    id: int
    position: Position
    antenna_height: float
    body_height: float
    speed: float
    waypoint: Position
    pause_remaining: float = 0.0
    kind: VehicleKind = VehicleKind.CAR

    @validator("speed")
    def _validate_speed(cls: Any, v: float) -> float:
        if not MIN_SPEED <= v <= MAX_SPEED:
            raise ValueError(f"speed must lie in [{MIN_SPEED}, {MAX_SPEED}], got {v}")
        return v

    def antenna(self) -> Tuple[float, float, float]:
        return (self.position.x, self.position.y, self.antenna_height)


def _permanent(blockages: Sequence[Blockage]) -> List[Blockage]:
    return [b for b in blockages if b.classification != BlockageClass.TEMPORARY]


def is_free(x: float, y: float, terrain: Terrain, blockages: Sequence[Blockage]) -> bool:
    return terrain.contains(x, y) and not any(b.contains(x, y) for b in blockages)


def _draw_free_point(
    terrain: Terrain, blockages: Sequence[Blockage], rng: Any, max_attempts: int
) -> Position:
    for _ in range(max_attempts):
        x = float(rng.uniform(0.0, terrain.width))
        y = float(rng.uniform(0.0, terrain.depth))
        if is_free(x, y, terrain, blockages):
            return Position(x=x, y=y)
    raise PlacementFailed(f"no free point found after {max_attempts} draws")


def _draw_speed(params: MobilityParams, rng: Any) -> float:
    if params.speed_mode == SpeedMode.UNIFORM:
        return float(rng.uniform(params.min_speed, params.max_speed))
    return params.speed


@validate_arguments(config=dict(arbitrary_types_allowed=True))
def rwp_init(
    terrain: Terrain,
    blockages: List[Blockage],
    n: int,
    rng: Any,
    params: MobilityParams = MobilityParams(),
) -> List[Vehicle]:
    """Random waypoint initial state for `n` vehicles.

    The first round(n * large_vehicle_fraction) vehicles are large vehicles
    with a roof antenna; the rest are cars.
    """
    if n < 0:
        raise ValueError(f"vehicle count must be >= 0, got {n}")
    obstacles = _permanent(blockages)
    n_large = int(round(n * params.large_vehicle_fraction))

    vehicles = []
    for idx in range(n):
        large = idx < n_large
        body = params.large_body_height if large else params.car_body_height
        vehicles.append(
            Vehicle(
                id=idx,
                position=_draw_free_point(terrain, obstacles, rng, params.max_attempts),
                antenna_height=body if large else params.antenna_height,
                body_height=body,
                speed=_draw_speed(params, rng),
                waypoint=_draw_free_point(terrain, obstacles, rng, params.max_attempts),
                kind=VehicleKind.LARGE_VEHICLE if large else VehicleKind.CAR,
            )
        )
    log.debug(f"initialised {n} vehicles ({n_large} large)")
    return vehicles


def rwp_step(
    v: Vehicle,
    terrain: Terrain,
    blockages: Sequence[Blockage],
    dt: float,
    rng: Any,
    params: MobilityParams = MobilityParams(),
) -> Vehicle:
    """Advance one vehicle by `dt` seconds (in place) and return it.

    A pausing vehicle only counts its pause down and draws its next waypoint
    when the pause ends. A move that would leave the terrain or cross a
    permanent footprint is cancelled and a new waypoint is drawn.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    obstacles = _permanent(blockages)

    if v.pause_remaining > 0:
        v.pause_remaining = max(0.0, v.pause_remaining - dt)
        if v.pause_remaining == 0.0:
            v.waypoint = _draw_free_point(terrain, obstacles, rng, params.max_attempts)
            v.speed = _draw_speed(params, rng)
        return v

    x0, y0 = v.position.x, v.position.y
    dx, dy = v.waypoint.x - x0, v.waypoint.y - y0
    remaining = math.hypot(dx, dy)
    step = v.speed * dt
    arrived = remaining <= step
    if arrived:
        x1, y1 = v.waypoint.x, v.waypoint.y
    else:
        x1, y1 = x0 + dx / remaining * step, y0 + dy / remaining * step

    collided = not terrain.contains(x1, y1) or any(
        segment_hits_footprint(x0, y0, x1, y1, b) for b in obstacles
    )
    if collided:
        previous = v.waypoint
        v.waypoint = _draw_free_point(terrain, obstacles, rng, params.max_attempts)
        while v.waypoint == previous:
            v.waypoint = _draw_free_point(terrain, obstacles, rng, params.max_attempts)
        return v

    v.position = Position(x=x1, y=y1)
    if arrived:
        v.pause_remaining = params.pause_s
        if params.pause_s == 0:
            v.waypoint = _draw_free_point(terrain, obstacles, rng, params.max_attempts)
            v.speed = _draw_speed(params, rng)
    return v


def constant_position_step(entity: Any, dt: float = 0.0) -> Any:
    """Constant position model: the entity never moves."""
    return entity
