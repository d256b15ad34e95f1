"""Error taxonomy of the simulator.

Every error derives from `RMLSimError` and from the builtin exception that
describes its nature, so callers can catch either.
"""


class RMLSimError(Exception):
    """Base class for all simulator errors."""


class InvalidGeometry(RMLSimError, ValueError):
    """Degenerate blocking geometry (receiver antenna not below the BS)."""


class PlacementFailed(RMLSimError, RuntimeError):
    """Rejection sampling could not place an entity in the free space."""


class InvalidEstimate(RMLSimError, ValueError):
    """Handoff flow estimate with a non-positive estimation time."""


class ZeroProbability(RMLSimError, ValueError):
    """A link with zero success probability has no finite metric."""


class NoCandidates(RMLSimError, ValueError):
    """Action selection over an empty candidate set."""


class ConfigError(RMLSimError, ValueError):
    """Invalid scenario configuration."""


class ParseError(ConfigError):
    """Malformed configuration file."""

    def __init__(self, message: str, line: int = 0, key: str = "") -> None:
        self.line = line
        self.key = key
        where = f"line {line}" if line else "file"
        if key:
            where += f", key '{key}'"
        super().__init__(f"{where}: {message}")


class ConfigValidationError(ConfigError):
    """A configuration value violates an invariant."""

    def __init__(self, field: str, message: str) -> None:
        self.field = field
        super().__init__(f"{field}: {message}")


class EmptyTrace(RMLSimError, ValueError):
    """Metrics requested over an empty delivery trace."""


class ResultsIOError(RMLSimError, OSError):
    """Result or trace files could not be written or read."""


class SweepPointFailed(RMLSimError, RuntimeError):
    """A scenario of a sweep failed; carries the failing point."""

    def __init__(self, axis: str, value: int, mode: str, seed: int, cause: BaseException) -> None:
        self.axis = axis
        self.value = value
        self.mode = mode
        self.seed = seed
        self.cause = cause
        super().__init__(
            f"sweep point {axis}={value} mode={mode} seed={seed} failed: {cause!r}"
        )
