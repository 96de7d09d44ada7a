"""Exception hierarchy shared by the package."""


class DsppaError(Exception):
    """Base class for all package errors."""


class DimensionError(DsppaError):
    """Shapes or partition sizes are inconsistent."""


class ArgumentError(DsppaError):
    """An argument value is outside its valid range."""


class NumericError(DsppaError):
    """Non-finite values or numerical breakdown."""


class DivergedError(NumericError):
    """An iterate norm exceeded the divergence guard."""


class FormatError(DsppaError):
    """A file failed to parse (bad magic, ragged rows, truncated payload)."""


class DataError(DsppaError):
    """Parsed data contains invalid (e.g. non-finite) values."""


class TuningError(DsppaError):
    """Every solve along a tuning grid failed."""
