"""Exception hierarchy for xaskit."""


class XasKitError(Exception):
    """Base class for all xaskit errors."""


class ParseError(XasKitError):
    """Raised when a columnar data file cannot be parsed."""


class XdiFormatError(ParseError):
    """Raised when an XDI document violates the format rules."""


class ColumnDetectionError(XasKitError):
    """Raised when no usable energy axis (or role assignment) can be found."""


class MuError(XasKitError):
    """Raised when mu(E) cannot be computed from the detected columns."""


class MergeError(XasKitError):
    """Raised when spectra cannot be merged (insufficient overlap etc.)."""


class FitError(XasKitError):
    """Raised when a background or pre-edge fit is infeasible."""


class DomainError(XasKitError, ValueError):
    """Raised when an argument is outside the mathematical domain of an operation."""


class RangeError(XasKitError, ValueError):
    """Raised when interpolation targets fall outside the data range."""
