"""Exception hierarchy shared by every module of the package."""


class PSDistortionError(Exception):
    """Base class for all errors raised by psdistortion."""


class DimensionError(PSDistortionError, ValueError):
    """Array shapes do not agree (e.g. a PS-vector of the wrong length)."""


class RangeError(PSDistortionError, ValueError):
    """A value lies outside its admissible range."""


class InconsistentProfile(PSDistortionError, ValueError):
    """A profile contradicts a strict PS-value comparison."""


class UndefinedDistortion(PSDistortionError, ValueError):
    """Every alternative has zero welfare, so the welfare ratio is undefined."""


class EnumerationOverflow(PSDistortionError):
    """More consistent profiles exist than the enumeration cap allows."""

    def __init__(self, count, cap):
        self.count = count
        self.cap = cap
        super().__init__(f"more than {cap} consistent profiles (enumeration cap)")


class BudgetExceeded(PSDistortionError):
    """A brute-force computation would exceed its evaluation budget."""


class UnsupportedSize(PSDistortionError, ValueError):
    """The instance is too large (or the wrong size) for the requested routine."""


class ConstructionError(PSDistortionError, ValueError):
    """Construction parameters violate one of the inequalities the instance needs."""


class VerificationError(PSDistortionError):
    """A mechanically checked claim did not hold."""


class InstanceFormatError(PSDistortionError, ValueError):
    """An instance file is not well-formed JSON or misses required fields."""
