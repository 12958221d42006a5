class NumericalInvariantError(ArithmeticError):
    """A computed object violated an invariant it must satisfy (unity, PSD, trace, ...)."""


class BudgetExceeded(RuntimeError):
    """A requested computation does not fit the configured desk-scale budget."""
