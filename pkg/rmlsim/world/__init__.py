# rmlsim relative
from .geometry import (  # noqa: F401
    Blockage,
    BlockageClass,
    BlockageGeometry,
    BlockageIndex,
    LinkState,
    LOSResult,
    Position,
    Terrain,
    critical_blocking_distance,
    distance,
    los_test,
    place_blockages,
    shadow_extent,
)
from .mobility import (  # noqa: F401
    MobilityParams,
    SpeedMode,
    Vehicle,
    VehicleKind,
    constant_position_step,
    rwp_init,
    rwp_step,
)
