# rmlsim relative
from .blockage import (  # noqa: F401
    BlockageMap,
    BlockageThreshold,
    MapEntry,
    classify_blockage,
    estimate_blockage_location,
)
from .flow import FlowEstimate, FlowTracker, flow_estimate  # noqa: F401
from .metrics import RelayPath, link_metric, path_metric  # noqa: F401
from .policy import (  # noqa: F401
    PolicyParams,
    QPolicy,
    Transition,
    delivery_reward,
    policy_summary,
    q_select_action,
    q_state,
    q_update,
    replay_train,
)
from .selection import (  # noqa: F401
    BestMetricSelector,
    GreedyNearestSelector,
    LearnedSelector,
    RelayCandidate,
    RelayDecision,
    RelaySelector,
    SelectionMode,
    Selectors,
    WorldSnapshot,
    candidate_relays,
    select_relay,
)
