# stdlib
import math

# third party
import numpy as np
import pytest
from conftest import make_building
from pydantic import ValidationError

# rmlsim absolute
from rmlsim.exceptions import InvalidGeometry, PlacementFailed
from rmlsim.world.geometry import (
    Blockage,
    BlockageClass,
    BlockageGeometry,
    LinkState,
    Position,
    Terrain,
    critical_blocking_distance,
    distance,
    los_test,
    place_blockages,
    shadow_extent,
)


@pytest.mark.parametrize(
    "p, q, expected",
    [
        ((0, 0), (0, 0), 0.0),
        ((0, 0), (3, 4), 5.0),
        ((55, 55), (115, 115), 60 * math.sqrt(2)),
    ],
)
def test_distance(p: tuple, q: tuple, expected: float) -> None:
    a = Position(x=p[0], y=p[1])
    b = Position(x=q[0], y=q[1])
    assert distance(a, b) == pytest.approx(expected)
    assert distance(b, a) == distance(a, b)


def test_distance_triangle_inequality() -> None:
    rng = np.random.default_rng(1)
    for _ in range(200):
        a, b, c = (Position(x=x, y=y) for x, y in rng.uniform(0, 300, size=(3, 2)))
        assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9


def test_position_rejects_non_finite() -> None:
    with pytest.raises(ValidationError):
        Position(x=math.nan, y=0)


def test_terrain_rejects_outside_bs() -> None:
    with pytest.raises(ValidationError):
        Terrain(bs_position=Position(x=400, y=10))


@pytest.mark.parametrize(
    "geometry, expected",
    [
        (dict(omega_m=20, w_v=2, h_bs=10, h_l=1.5, h_s=1.5), 21.0),
        (dict(omega_m=20, w_v=2, h_bs=10, h_l=4, h_s=1.5), 29.75),
        (dict(omega_m=20, w_v=2, h_bs=10, h_l=12, h_s=1.5), math.inf),
        (dict(omega_m=20, w_v=2, h_bs=10, h_l=10, h_s=1.5), math.inf),
    ],
)
def test_critical_blocking_distance(geometry: dict, expected: float) -> None:
    assert critical_blocking_distance(BlockageGeometry(**geometry)) == pytest.approx(expected)


def test_critical_blocking_distance_degenerate() -> None:
    with pytest.raises(InvalidGeometry):
        critical_blocking_distance(BlockageGeometry(omega_m=20, w_v=2, h_bs=1.5, h_l=1, h_s=1.5))


def test_critical_blocking_distance_increasing() -> None:
    rng = np.random.default_rng(2)
    for _ in range(1000):
        h_bs = rng.uniform(5, 40)
        h_s = rng.uniform(0.5, h_bs * 0.9)
        h_l = rng.uniform(0.1, h_bs * 0.99)
        w_v = rng.uniform(0, 60)
        lo, hi = np.sort(rng.uniform(0, 200, size=2))
        if hi - lo < 1e-6:
            continue
        near = critical_blocking_distance(BlockageGeometry(omega_m=lo, w_v=w_v, h_bs=h_bs, h_l=h_l, h_s=h_s))
        far = critical_blocking_distance(BlockageGeometry(omega_m=hi, w_v=w_v, h_bs=h_bs, h_l=h_l, h_s=h_s))
        assert near < far

        wider = critical_blocking_distance(
            BlockageGeometry(omega_m=lo, w_v=w_v + 1, h_bs=h_bs, h_l=h_l, h_s=h_s)
        )
        assert near < wider


def test_los_empty_world(terrain: Terrain) -> None:
    result = los_test(terrain, [], terrain.bs_position, 25, Position(x=10, y=10), 1.5)
    assert result.state == LinkState.LOS
    assert result.blocker_id is None


def test_los_over_the_top(terrain: Terrain) -> None:
    low = make_building(3, 150, 30, 2, 1.0)
    result = los_test(terrain, [low], terrain.bs_position, 25, Position(x=150, y=10), 1.5)
    assert result.los


def test_los_blocked_by_building(terrain: Terrain) -> None:
    building = make_building(7, 150, 80, 25, 10)
    result = los_test(terrain, [building], terrain.bs_position, 25, Position(x=150, y=10), 1.5)
    assert result.state == LinkState.NLOS
    assert result.blocker_id == 7


def test_los_reports_lowest_id(terrain: Terrain) -> None:
    far = make_building(9, 150, 60, 5, 10)
    near = make_building(4, 150, 100, 5, 10)
    result = los_test(terrain, [far, near], Position(x=150, y=140), 1.5, Position(x=150, y=20), 1.5)
    assert result.blocker_id == 4


def test_los_symmetric(terrain: Terrain) -> None:
    rng = np.random.default_rng(3)
    buildings = place_blockages(terrain, 6, rng)
    for _ in range(300):
        (ax, ay), (bx, by) = rng.uniform(0, 300, size=(2, 2))
        ha, hb = rng.uniform(1, 25, size=2)
        a, b = Position(x=ax, y=ay), Position(x=bx, y=by)
        assert los_test(terrain, buildings, a, ha, b, hb) == los_test(terrain, buildings, b, hb, a, ha)


def test_los_temporary_owner_excluded(terrain: Terrain) -> None:
    truck = Blockage(
        id=20,
        center=Position(x=100, y=100),
        half_width_x=2,
        half_width_y=2,
        height=4,
        classification=BlockageClass.TEMPORARY,
        owner_id=5,
    )
    a, b = Position(x=100, y=100), Position(x=100, y=50)
    assert not los_test(terrain, [truck], a, 1.5, b, 1.5).los
    assert los_test(terrain, [truck], a, 1.5, b, 1.5, endpoint_ids=(5, 6)).los


def test_los_outside_terrain(terrain: Terrain) -> None:
    with pytest.raises(ValueError):
        los_test(terrain, [], Position(x=-1, y=0), 1.5, terrain.bs_position, 25)


@pytest.mark.parametrize("ground_distance, los", [(70, False), (90, False), (100, True), (130, True)])
def test_shadow_boundary_matches_geometry(ground_distance: float, los: bool) -> None:
    terrain = Terrain(bs_position=Position(x=10, y=150), bs_height=25)
    omega, w = 40.0, 20.0
    blocker = Blockage(
        id=0,
        center=Position(x=10 + omega + w / 2, y=150),
        half_width_x=w / 2,
        half_width_y=20,
        height=10,
        classification=BlockageClass.PERMANENT,
    )
    g = BlockageGeometry(omega_m=omega, w_v=w, h_bs=25, h_l=10, h_s=1.5)
    near, far = shadow_extent(g)
    assert far == pytest.approx(60 / (15 / 23.5))
    assert (near < ground_distance < far) == (not los)

    rx = Position(x=10 + ground_distance, y=150)
    assert los_test(terrain, [blocker], terrain.bs_position, 25, rx, 1.5).los == los


def test_shadow_extent_tall_blocker() -> None:
    near, far = shadow_extent(BlockageGeometry(omega_m=10, w_v=5, h_bs=25, h_l=30, h_s=1.5))
    assert near == 15
    assert far == math.inf


def test_place_blockages_empty(terrain: Terrain, rng: np.random.Generator) -> None:
    assert place_blockages(terrain, 0, rng) == []


def test_place_blockages_deterministic(terrain: Terrain) -> None:
    first = place_blockages(terrain, 2, np.random.default_rng(42))
    second = place_blockages(terrain, 2, np.random.default_rng(42))
    assert first == second


@pytest.mark.parametrize("seed", range(5))
def test_place_blockages_disjoint(terrain: Terrain, seed: int) -> None:
    blockages = place_blockages(terrain, 10, np.random.default_rng(seed))
    assert len(blockages) == 10
    for i, a in enumerate(blockages):
        assert a.classification == BlockageClass.PERMANENT
        assert not a.contains(terrain.bs_position.x, terrain.bs_position.y)
        x0, y0, x1, y1 = a.bounds()
        assert x0 >= 0 and y0 >= 0 and x1 <= terrain.width and y1 <= terrain.depth
        for b in blockages[i + 1 :]:
            assert not a.overlaps(b)


def test_place_blockages_fails(terrain: Terrain, rng: np.random.Generator) -> None:
    # 37 disjoint 50 x 50 footprints cannot fit on 300 x 300
    with pytest.raises(PlacementFailed):
        place_blockages(terrain, 37, rng, max_attempts=2000)
