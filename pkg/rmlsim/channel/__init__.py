# rmlsim relative
from .model import (  # noqa: F401
    SPEED_OF_LIGHT,
    ChannelParams,
    LinkSample,
    attempt_link,
    describe_link,
    link_latency,
    link_margin,
    link_success_prob,
    path_loss,
    sample_link,
)
