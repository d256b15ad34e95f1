# stdlib
import json
from enum import Enum
from typing import Any, Callable, Dict, Optional, Tuple

# third party
from pydantic import BaseSettings, ValidationError, root_validator, validate_model, validator

# rmlsim absolute
from rmlsim.channel.model import ChannelParams
from rmlsim.exceptions import ConfigValidationError
from rmlsim.rml.blockage import BlockageThreshold
from rmlsim.rml.policy import PolicyParams
from rmlsim.rml.selection import SelectionMode
from rmlsim.world.geometry import Position, Terrain
from rmlsim.world.mobility import MobilityParams, SpeedMode

# eNB position per blockage count
ENB_PRESET: Dict[int, Tuple[float, float]] = {
    2: (55.0, 55.0),
    4: (115.0, 115.0),
    6: (175.0, 175.0),
    8: (235.0, 235.0),
    10: (295.0, 295.0),
}


class Mode(str, Enum):
    RML = "rml"
    BASELINE = "baseline"


class ScenarioConfig(BaseSettings):
    """Resolved parameters of one scenario run.

    Values come from keyword arguments (typically a parsed config file) and
    are overridden by `RMLSIM_*` environment variables; nested models use a
    double underscore, e.g. `RMLSIM_CHANNEL__TX_POWER_DBM=27`.
    """

    # terrain
    terrain_width: float = 300.0
    terrain_depth: float = 300.0
    bs_x: float = 150.0
    bs_y: float = 150.0
    bs_height: float = 25.0
    bs_coverage_radius: float = 300.0
    enb_preset: bool = False

    # population
    n_vehicles: int = 20
    n_blockages: int = 10
    blockage_size_x: float = 50.0
    blockage_size_y: float = 50.0
    blockage_height: float = 10.0

    # mobility
    speed_mode: SpeedMode = SpeedMode.CONSTANT
    speed: float = 15.0
    min_speed: float = 0.1
    max_speed: float = 15.0
    pause_s: float = 5.0
    large_vehicle_fraction: float = 0.2
    car_body_height: float = 1.5
    large_body_height: float = 4.0
    large_vehicle_half_width_m: float = 2.0
    antenna_height: float = 1.5

    # run
    mode: Mode = Mode.RML
    selector: SelectionMode = SelectionMode.LEARNED
    direct_fallback: bool = True
    sim_time_s: float = 50.0
    dt_s: float = 0.1
    interpacket_ms: float = 200.0
    warmup_fraction: float = 0.2
    map_refresh_s: float = 1.0
    flow_m: int = 0
    # relay->target range; None leaves it to the link success probability
    tx_radius_m: Optional[float] = None
    epsilon_height: float = BlockageThreshold().epsilon_height
    seed: int = 0

    channel: ChannelParams = ChannelParams()
    policy: PolicyParams = PolicyParams()

    class Config:
        env_prefix = "RMLSIM_"
        env_nested_delimiter = "__"
        validate_assignment = True

        @classmethod
        def customise_sources(
            cls,
            init_settings: Callable,
            env_settings: Callable,
            file_secret_settings: Callable,
        ) -> Tuple[Callable, ...]:
            return env_settings, init_settings, file_secret_settings

    @validator(
        "terrain_width",
        "terrain_depth",
        "bs_height",
        "bs_coverage_radius",
        "blockage_size_x",
        "blockage_size_y",
        "blockage_height",
        "large_vehicle_half_width_m",
        "antenna_height",
        "sim_time_s",
        "dt_s",
        "interpacket_ms",
        "map_refresh_s",
        "tx_radius_m",
        "epsilon_height",
    )
    def _validate_positive(cls: Any, v: float) -> float:
        if v <= 0:
            raise ValueError(f"must be > 0, got {v}")
        return v

    @validator("n_vehicles")
    def _validate_vehicles(cls: Any, v: int) -> int:
        if v < 1:
            raise ValueError(f"at least one vehicle is required, got {v}")
        return v

    @validator("n_blockages", "flow_m")
    def _validate_counts(cls: Any, v: int) -> int:
        if v < 0:
            raise ValueError(f"must be >= 0, got {v}")
        return v

    @validator("warmup_fraction")
    def _validate_fraction(cls: Any, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"must lie in [0, 1], got {v}")
        return v

    @root_validator(skip_on_failure=True)
    def _validate_world(cls: Any, values: Dict) -> Dict:
        if not 0 <= values["bs_x"] <= values["terrain_width"]:
            raise ValueError("bs_x lies outside the terrain")
        if not 0 <= values["bs_y"] <= values["terrain_depth"]:
            raise ValueError("bs_y lies outside the terrain")
        if values["bs_height"] <= values["antenna_height"]:
            raise ValueError("bs_height must exceed the vehicle antenna height")
        if values["large_body_height"] >= values["epsilon_height"]:
            raise ValueError("large vehicles must stay below the permanent blockage threshold")
        # delegate the rest to the component models
        MobilityParams(**_mobility_kwargs(values))
        return values

    def bs_position(self) -> Position:
        if self.enb_preset and self.n_blockages in ENB_PRESET:
            x, y = ENB_PRESET[self.n_blockages]
            return Position(x=x, y=y)
        return Position(x=self.bs_x, y=self.bs_y)

    def terrain(self) -> Terrain:
        return Terrain(
            width=self.terrain_width,
            depth=self.terrain_depth,
            bs_position=self.bs_position(),
            bs_height=self.bs_height,
            bs_coverage_radius=self.bs_coverage_radius,
        )

    def mobility(self) -> MobilityParams:
        return MobilityParams(**_mobility_kwargs(self.dict()))

    def threshold(self) -> BlockageThreshold:
        return BlockageThreshold(epsilon_height=self.epsilon_height)

    def resolved(self) -> Dict[str, Any]:
        """Plain JSON-compatible view of every parameter."""
        return json.loads(self.json())


def _mobility_kwargs(values: Dict) -> Dict:
    keys = [
        "speed_mode",
        "speed",
        "min_speed",
        "max_speed",
        "pause_s",
        "large_vehicle_fraction",
        "car_body_height",
        "large_body_height",
        "antenna_height",
    ]
    return {k: values[k] for k in keys}


def _as_config_error(e: ValidationError) -> ConfigValidationError:
    first = e.errors()[0]
    field = ".".join(str(p) for p in first["loc"])
    return ConfigValidationError(field, first["msg"])


def build_config(**kwargs: Any) -> ScenarioConfig:
    """Build a config from keyword values; environment variables win."""
    try:
        return ScenarioConfig(**kwargs)
    except ValidationError as e:
        raise _as_config_error(e) from e


def revalidate(cfg: ScenarioConfig, **update: Any) -> ScenarioConfig:
    """Apply `update` on top of `cfg` and re-check every invariant.

    The environment is not consulted again, so the result only differs from
    `cfg` in the updated fields.
    """
    data = cfg.dict()
    data.update(update)
    values, fields_set, error = validate_model(ScenarioConfig, data)
    if error is not None:
        raise _as_config_error(error)
    return ScenarioConfig.construct(_fields_set=fields_set, **values)
