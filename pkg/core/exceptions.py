"""Error types shared by the toolkit.

Everything raised on purpose derives from SurveilError so the CLI can map
failures to exit codes in one place.
"""

from typing import Iterable, Optional


class SurveilError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(SurveilError):
    """Invalid parameters or configuration.

    Attributes:
        key: Offending key, when there is one
        location: "file:line" of the offending entry, when known
    """

    def __init__(self, message: str, key: Optional[str] = None, location: Optional[str] = None):
        self.key = key
        self.location = location
        prefix = f"{location}: " if location else ""
        super().__init__(f"{prefix}{message}")


class ConfigParseError(ConfigurationError):
    """A configuration file could not be turned into an ExperimentConfig."""

    def __init__(
        self,
        message: str,
        key: Optional[str] = None,
        location: Optional[str] = None,
        missing: Iterable[str] = (),
    ):
        self.missing = tuple(missing)
        super().__init__(message, key=key, location=location)


class DomainError(SurveilError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class GeometryError(SurveilError):
    """Curved-earth link geometry is infeasible (e.g. beyond the radio horizon)."""


class NumericalError(SurveilError):
    """An integral could not be brought under its tolerance.

    Attributes:
        estimate: Best value reached
        error_bound: Error estimate that failed the tolerance
    """

    def __init__(self, message: str, estimate: float, error_bound: float):
        self.estimate = estimate
        self.error_bound = error_bound
        super().__init__(f"{message} (estimate={estimate:.6g}, error={error_bound:.3g})")


class EncodingError(SurveilError):
    """A value does not fit the wire format."""

    def __init__(self, message: str, field: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class FramingError(SurveilError):
    """Frame has the wrong length or framing octet."""


class IntegrityError(SurveilError):
    """Frame parity check failed."""

    def __init__(self, syndrome: int):
        self.syndrome = syndrome
        super().__init__(f"CRC mismatch, syndrome {syndrome:06X}")


class SbsParseError(SurveilError):
    """An SBS line could not be parsed."""

    def __init__(self, message: str, field_index: int):
        self.field_index = field_index
        self.reason = message
        super().__init__(f"field {field_index}: {message}")


class WindowStateError(SurveilError):
    """Packet processed against a window in the wrong state."""


class DegeneracyError(SurveilError):
    """Circumsphere or supplement line is undefined for the given points."""
