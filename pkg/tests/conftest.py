# stdlib
from typing import Dict, List

# third party
import numpy as np
import pytest

# rmlsim absolute
from rmlsim.channel.model import ChannelParams
from rmlsim.world.geometry import Blockage, BlockageClass, Position, Terrain
from rmlsim.world.mobility import Vehicle, VehicleKind


def make_vehicle(
    vid: int,
    x: float,
    y: float,
    kind: VehicleKind = VehicleKind.CAR,
    body_height: float = 1.5,
    antenna_height: float = 1.5,
) -> Vehicle:
    return Vehicle(
        id=vid,
        position=Position(x=x, y=y),
        antenna_height=antenna_height,
        body_height=body_height,
        speed=15.0,
        waypoint=Position(x=x, y=y),
        pause_remaining=1e9,
        kind=kind,
    )


def make_building(bid: int, x: float, y: float, half: float, height: float) -> Blockage:
    return Blockage(
        id=bid,
        center=Position(x=x, y=y),
        half_width_x=half,
        half_width_y=half,
        height=height,
        classification=BlockageClass.PERMANENT,
    )


@pytest.fixture
def terrain() -> Terrain:
    return Terrain()


@pytest.fixture
def relay_world() -> Dict:
    """One 15 m building south of the BS and four parked cars.

    Vehicle 0 sits in the building's shadow. Vehicles 1, 2 and 3 see both
    the BS and vehicle 0 and rank 1, 2, 3 by distance to it; vehicle 2 has
    the best two-hop path under `channel`.
    """
    buildings: List[Blockage] = [make_building(0, 150.0, 125.0, 10.0, 15.0)]
    vehicles = [
        make_vehicle(0, 150.0, 95.0),
        make_vehicle(1, 175.0, 70.0),
        make_vehicle(2, 110.0, 120.0),
        make_vehicle(3, 150.0, 40.0),
    ]
    channel = ChannelParams(rx_threshold_dbm=-70.2, shadow_sigma_los_db=2.0, max_retries=0)
    return {
        "terrain": Terrain(),
        "buildings": buildings,
        "vehicles": vehicles,
        "channel": channel,
        "target": 0,
        "ranking": [1, 2, 3],
        "best_rank": 1,
    }


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)
