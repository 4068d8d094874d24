class ResourceCapError(RuntimeError):
    """The requested register does not fit the statevector simulator."""


class BudgetError(ValueError):
    """Query budget too small for the requested algorithm."""


class ResidualBoundError(ArithmeticError):
    """A control-variate residual exceeded its certified bound."""
