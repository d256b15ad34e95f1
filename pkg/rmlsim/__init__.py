# stdlib
import sys
import warnings

# rmlsim relative
from . import logger  # noqa: F401
from .version import __version__  # noqa: F401

warnings.simplefilter(action="ignore", category=FutureWarning)

logger.add(sink=sys.stderr, level="CRITICAL")
