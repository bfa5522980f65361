"""Exception types.

Everything derives from :class:`PMISampleError`. Input problems are also
``ValueError`` subclasses so generic callers can catch them the usual way.
"""


class PMISampleError(Exception):
    pass


class ValidationError(PMISampleError, ValueError):
    pass


class SizeMismatch(ValidationError):
    def __init__(self, expected, actual, what="bytes"):
        self.expected = expected
        self.actual = actual
        super().__init__(f"size mismatch: expected {expected} {what}, got {actual}")


class NonFiniteValue(ValidationError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"non-finite value at linear index {index}")


class MalformedHeader(ValidationError):
    pass


class InvalidSpec(ValidationError):
    pass


class SchemaError(ValidationError):
    pass


class UnknownVariable(ValidationError, KeyError):
    def __init__(self, name):
        self.name = name
        ValidationError.__init__(self, f"unknown variable {name!r}")

    __str__ = ValidationError.__str__


class DimensionalityTooHigh(ValidationError):
    def __init__(self, d, d_max):
        self.d = d
        self.d_max = d_max
        super().__init__(f"{d} variables requested, at most {d_max} supported")


class MemoryBudgetExceeded(ValidationError):
    def __init__(self, requested_bins, budget_bytes):
        self.requested_bins = requested_bins
        self.budget_bytes = budget_bytes
        super().__init__(
            f"{requested_bins} bins x 8 bytes exceeds the {budget_bytes}-byte budget")


class AxisOutOfRange(ValidationError, IndexError):
    pass


class EmptyHistogram(ValidationError):
    pass


class WrongDimensionality(ValidationError):
    pass


class Unachievable(ValidationError):
    def __init__(self, target, reachable):
        self.target = target
        self.reachable = reachable
        super().__init__(
            f"cannot select {target} points, at most {reachable} have nonzero acceptance")


class QuerySyntaxError(ValidationError):
    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} at position {position}")


class UnknownOperator(QuerySyntaxError):
    pass


class GridMismatch(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class TooSmall(ValidationError):
    pass


class ZeroVariance(ValidationError):
    pass


class EmptyROI(ValidationError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class DegenerateGeometry(UserWarning):
    """Warning: sample locations do not span the grid's dimensions."""


class DegenerateTable(UserWarning):
    """Warning: every normalized value is zero; sampling falls back to uniform."""


class InvariantViolation(PMISampleError):
    """Internal consistency check failed (a bug, not an input problem)."""
