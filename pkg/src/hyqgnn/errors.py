"""Exception hierarchy shared across the package."""


class HyqgnnError(Exception):
    """Base class for all package errors."""


class UnknownElement(HyqgnnError, KeyError):
    pass


class InvalidComposition(HyqgnnError, ValueError):
    pass


class ChargeNotNeutral(HyqgnnError, ValueError):
    pass


class ConvergenceFailure(HyqgnnError, RuntimeError):
    pass


class DegenerateGeometry(HyqgnnError, ValueError):
    pass


class EmptyNeighborhood(HyqgnnError, ValueError):
    pass


class LayoutMismatch(HyqgnnError, ValueError):
    pass


class ZeroVector(HyqgnnError, ValueError):
    pass


class TooLong(HyqgnnError, ValueError):
    pass


class IndexOutOfRange(HyqgnnError, IndexError):
    pass


class BudgetExhausted(HyqgnnError, RuntimeError):
    pass


class WidthMismatch(HyqgnnError, ValueError):
    pass


class ParseError(HyqgnnError, ValueError):
    pass


class SchemaError(HyqgnnError, ValueError):
    pass


class InsufficientData(HyqgnnError, ValueError):
    pass


class ConstantTarget(HyqgnnError, ValueError):
    pass


class DegeneratePrediction(HyqgnnError, ValueError):
    pass


class DegenerateDataWarning(UserWarning):
    """Emitted when boosting is asked to fit a constant target."""
