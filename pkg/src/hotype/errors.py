"""Exception types shared across the toolkit."""


class HotypeError(Exception):
    """Base class for all toolkit errors."""


class BudgetExceededError(HotypeError):
    """A construction would exceed the configured point budget."""


class ResolutionError(HotypeError):
    """A radius or scale falls outside the resolved range of a space."""


class DuplicatePointError(HotypeError):
    """Two distinct stored points coincide (zero measure distance)."""


class KindMismatchError(HotypeError, TypeError):
    """Points or spaces of incompatible kinds were combined."""


class SpaceMismatchError(HotypeError):
    """A function or atom was used with a space it does not belong to."""


class DegenerateBallError(HotypeError):
    """A ball carries too few points for the requested polynomial span."""


class UnsupportedFamilyError(HotypeError):
    """The testing-polynomial family does not support the requested degree."""


class SchemaError(HotypeError):
    """A config or serialized file violates its schema."""

    def __init__(self, field, reason):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class FormatError(HotypeError):
    """A serialized file has a bad header or malformed body."""
