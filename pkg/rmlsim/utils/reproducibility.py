# stdlib
import random
from typing import Dict

# third party
import numpy as np

STREAMS = ("world", "channel", "policy")


def enable_reproducible_results(seed: int = 0) -> None:
    np.random.seed(seed)
    random.seed(seed)


def create_rng(seed: int = 0) -> np.random.Generator:
    return np.random.default_rng(seed)


def spawn_streams(seed: int) -> Dict[str, np.random.Generator]:
    """Independent generators per concern, derived from one scenario seed.

    The world stream drives placement and mobility, the channel stream the
    Bernoulli link draws and the policy stream exploration and replay
    sampling. Two runs sharing a seed therefore see the same world no matter
    how many policy draws either of them makes.
    """
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: np.random.default_rng(child) for name, child in zip(STREAMS, children)}
