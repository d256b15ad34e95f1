# stdlib
import math
from enum import Enum
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

# third party
import numpy as np
from pydantic import BaseModel, validate_arguments, validator

# rmlsim absolute
import rmlsim.logger as log
from rmlsim.exceptions import InvalidGeometry, PlacementFailed

EPS = 1e-12


class LinkState(str, Enum):
    LOS = "LOS"
    NLOS = "NLOS"


class BlockageClass(str, Enum):
    PERMANENT = "Permanent"
    TEMPORARY = "Temporary"
    UNKNOWN = "Unknown"


class Position(BaseModel):
    x: float
    y: float

    @validator("x", "y")
    def _validate_finite(cls: Any, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError(f"coordinate must be finite, got {v}")
        return v

    def as_tuple(self) -> Tuple[float, float]:
        return (self.x, self.y)


class Terrain(BaseModel):
    """Rectangular world [0, width] x [0, depth] served by one base station."""

    width: float = 300.0
    depth: float = 300.0
    bs_position: Position = Position(x=150.0, y=150.0)
    bs_height: float = 25.0
    bs_coverage_radius: float = 300.0

    @validator("width", "depth", "bs_height", "bs_coverage_radius")
    def _validate_positive(cls: Any, v: float) -> float:
        if v <= 0:
            raise ValueError(f"must be > 0, got {v}")
        return v

    @validator("bs_position")
    def _validate_bs_inside(cls: Any, v: Position, values: Dict) -> Position:
        width = values.get("width")
        depth = values.get("depth")
        if width is not None and depth is not None:
            if not (0 <= v.x <= width and 0 <= v.y <= depth):
                raise ValueError(f"base station {v.as_tuple()} outside terrain")
        return v

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width and 0.0 <= y <= self.depth

    def bs_antenna(self) -> Tuple[float, float, float]:
        return (self.bs_position.x, self.bs_position.y, self.bs_height)


class Blockage(BaseModel):
    """Axis-aligned obstacle footprint extruded to `height`.

    Permanent blockages are buildings. Temporary ones are projected by a
    large vehicle (`owner_id`) and follow it.
    """

    id: int
    center: Position
    half_width_x: float
    half_width_y: float
    height: float
    classification: BlockageClass = BlockageClass.UNKNOWN
    owner_id: Optional[int] = None

    @validator("half_width_x", "half_width_y", "height")
    def _validate_positive(cls: Any, v: float) -> float:
        if v <= 0:
            raise ValueError(f"must be > 0, got {v}")
        return v

    def bounds(self) -> Tuple[float, float, float, float]:
        return (
            self.center.x - self.half_width_x,
            self.center.y - self.half_width_y,
            self.center.x + self.half_width_x,
            self.center.y + self.half_width_y,
        )

    def contains(self, x: float, y: float) -> bool:
        x0, y0, x1, y1 = self.bounds()
        return x0 <= x <= x1 and y0 <= y <= y1

    def overlaps(self, other: "Blockage") -> bool:
        ax0, ay0, ax1, ay1 = self.bounds()
        bx0, by0, bx1, by1 = other.bounds()
        return ax0 < bx1 and bx0 < ax1 and ay0 < by1 and by0 < ay1


class BlockageGeometry(BaseModel):
    """Similar-triangles picture of one blocker on the BS -> receiver ray."""

    omega_m: float
    w_v: float
    h_bs: float
    h_l: float
    h_s: float

    @validator("omega_m", "w_v")
    def _validate_non_negative(cls: Any, v: float) -> float:
        if v < 0:
            raise ValueError(f"must be >= 0, got {v}")
        return v

    @validator("h_bs", "h_l", "h_s")
    def _validate_heights(cls: Any, v: float) -> float:
        if v <= 0:
            raise ValueError(f"height must be > 0, got {v}")
        return v

    def height_ratio(self) -> float:
        if self.h_bs <= self.h_s:
            raise InvalidGeometry(
                f"BS height {self.h_bs} must exceed receiver height {self.h_s}"
            )
        return (self.h_bs - self.h_l) / (self.h_bs - self.h_s)


class LOSResult(NamedTuple):
    state: LinkState
    blocker_id: Optional[int] = None

    @property
    def los(self) -> bool:
        return self.state == LinkState.LOS


def distance(p: Position, q: Position) -> float:
    return math.hypot(p.x - q.x, p.y - q.y)


def critical_blocking_distance(g: BlockageGeometry) -> float:
    """Critical blocking distance B_C of blocker m.

    B_C = (omega_m + w_v / 2) / ((H_BS - H_L) / (H_BS - H_S)), infinite when
    the blocker is at least as tall as the BS.
    """
    ratio = g.height_ratio()
    if g.h_l >= g.h_bs:
        return math.inf
    return (g.omega_m + g.w_v / 2) / ratio


def shadow_extent(g: BlockageGeometry) -> Tuple[float, float]:
    """Ground-distance interval behind the blocker where a receiver at h_s is shadowed.

    The ray from the BS antenna to the receiver clears the far top edge of
    the blocker iff the receiver is farther than (omega_m + w_v) / ratio.
    The interval is empty (near == far) when the blocker is not taller than
    the receiver antenna.
    """
    ratio = g.height_ratio()
    near = g.omega_m + g.w_v
    if g.h_l >= g.h_bs:
        return near, math.inf
    if ratio >= 1.0:
        return near, near
    return near, near / ratio


class BlockageIndex:
    """Blockage volumes as id-sorted arrays for vectorised segment tests."""

    def __init__(self, blockages: Sequence[Blockage]) -> None:
        ordered = sorted(blockages, key=lambda b: b.id)
        self.ids = np.asarray([b.id for b in ordered], dtype=np.int64)
        self.owners = np.asarray(
            [-1 if b.owner_id is None else b.owner_id for b in ordered],
            dtype=np.int64,
        )
        self.lo = np.asarray(
            [
                [b.center.x - b.half_width_x, b.center.y - b.half_width_y, 0.0]
                for b in ordered
            ],
            dtype=float,
        ).reshape(-1, 3)
        self.hi = np.asarray(
            [
                [b.center.x + b.half_width_x, b.center.y + b.half_width_y, b.height]
                for b in ordered
            ],
            dtype=float,
        ).reshape(-1, 3)

    def __len__(self) -> int:
        return len(self.ids)

    def first_blockers(
        self,
        starts: np.ndarray,
        ends: np.ndarray,
        endpoint_ids: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """Lowest blocker id crossed by each segment, -1 when the segment is clear.

        Args:
            starts, ends: (P, 3) antenna points.
            endpoint_ids: optional (P, 2) vehicle ids of the endpoints (-1 for
                the BS); a temporary blockage never occludes its own owner.
        """
        starts = np.asarray(starts, dtype=float).reshape(-1, 3)
        ends = np.asarray(ends, dtype=float).reshape(-1, 3)
        n_segments = starts.shape[0]
        if n_segments == 0 or len(self) == 0:
            return np.full(n_segments, -1, dtype=np.int64)

        origin = starts[:, None, :]
        direction = (ends - starts)[:, None, :]
        parallel = np.abs(direction) < EPS
        inside = (origin >= self.lo[None]) & (origin <= self.hi[None])
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (self.lo[None] - origin) / direction
            t2 = (self.hi[None] - origin) / direction
        t_near = np.where(parallel, np.where(inside, -np.inf, np.inf), np.minimum(t1, t2))
        t_far = np.where(parallel, np.where(inside, np.inf, -np.inf), np.maximum(t1, t2))
        enter = np.maximum(t_near.max(axis=2), 0.0)
        leave = np.minimum(t_far.min(axis=2), 1.0)
        hit = enter < leave

        if endpoint_ids is not None:
            endpoint_ids = np.asarray(endpoint_ids, dtype=np.int64).reshape(-1, 2)
            owned = self.owners >= 0
            own = (self.owners[None, :] == endpoint_ids[:, 0:1]) | (
                self.owners[None, :] == endpoint_ids[:, 1:2]
            )
            hit &= ~(own & owned[None, :])

        first = hit.argmax(axis=1)
        return np.where(hit.any(axis=1), self.ids[first], -1)


def los_test(
    terrain: Terrain,
    blockages: Sequence[Blockage],
    a: Position,
    a_height: float,
    b: Position,
    b_height: float,
    endpoint_ids: Tuple[int, int] = (-1, -1),
) -> LOSResult:
    """Line-of-sight between two antennas.

    NLOS iff the 3-D segment between the antenna points crosses a blockage
    volume; the lowest-id blocker is reported.
    """
    for p in (a, b):
        if not terrain.contains(p.x, p.y):
            raise ValueError(f"point {p.as_tuple()} outside terrain")
    index = BlockageIndex(blockages)
    blocker = index.first_blockers(
        np.array([[a.x, a.y, a_height]]),
        np.array([[b.x, b.y, b_height]]),
        np.array([endpoint_ids]),
    )[0]
    if blocker < 0:
        return LOSResult(LinkState.LOS)
    return LOSResult(LinkState.NLOS, int(blocker))


def segment_hits_footprint(
    x0: float, y0: float, x1: float, y1: float, blockage: Blockage
) -> bool:
    """2-D ground segment against a footprint rectangle (slab test)."""
    bx0, by0, bx1, by1 = blockage.bounds()
    t_min, t_max = 0.0, 1.0
    for p, d, lo, hi in ((x0, x1 - x0, bx0, bx1), (y0, y1 - y0, by0, by1)):
        if abs(d) < EPS:
            if p < lo or p > hi:
                return False
            continue
        t1 = (lo - p) / d
        t2 = (hi - p) / d
        if t1 > t2:
            t1, t2 = t2, t1
        t_min = max(t_min, t1)
        t_max = min(t_max, t2)
        if t_min > t_max:
            return False
    return True


@validate_arguments(config=dict(arbitrary_types_allowed=True))
def place_blockages(
    terrain: Terrain,
    count: int,
    rng: Any,
    size_x: float = 50.0,
    size_y: float = 50.0,
    height: float = 10.0,
    max_attempts: int = 10000,
) -> List[Blockage]:
    """Seeded rejection sampling of non-overlapping permanent buildings.

    No footprint contains the BS position. Raises PlacementFailed after
    `max_attempts` rejected draws.
    """
    if count < 0:
        raise ValueError(f"blockage count must be >= 0, got {count}")
    hx, hy = size_x / 2, size_y / 2
    if 2 * hx > terrain.width or 2 * hy > terrain.depth:
        raise PlacementFailed(
            f"footprint {size_x}x{size_y} does not fit a {terrain.width}x{terrain.depth} terrain"
        )

    placed: List[Blockage] = []
    attempts = 0
    while len(placed) < count:
        if attempts >= max_attempts:
            raise PlacementFailed(
                f"placed {len(placed)} of {count} blockages after {attempts} attempts"
            )
        attempts += 1
        candidate = Blockage(
            id=len(placed),
            center=Position(
                x=float(rng.uniform(hx, terrain.width - hx)),
                y=float(rng.uniform(hy, terrain.depth - hy)),
            ),
            half_width_x=hx,
            half_width_y=hy,
            height=height,
            classification=BlockageClass.PERMANENT,
        )
        if candidate.contains(terrain.bs_position.x, terrain.bs_position.y):
            continue
        if any(candidate.overlaps(other) for other in placed):
            continue
        placed.append(candidate)

    log.debug(f"placed {count} blockages in {attempts} attempts")
    return placed
