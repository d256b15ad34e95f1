# rmlsim relative
from .config import ENB_PRESET, Mode, ScenarioConfig, build_config, revalidate  # noqa: F401
from .engine import (  # noqa: F401
    BroadcastMessage,
    BroadcastQueue,
    ScenarioResult,
    ScenarioState,
    broadcast_step,
    deliver_direct,
    deliver_via_relay,
    run_scenario,
)
from .records import (  # noqa: F401
    TRACE_COLUMNS,
    DeliveryRecord,
    MetricsRecord,
    Outcome,
    compute_metrics,
    read_trace,
    trace_frame,
    write_trace,
)
