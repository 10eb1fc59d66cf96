class FavardError(Exception):
    """Base class for all errors raised by the package."""


class WrongModel(FavardError):
    pass


class BudgetExceeded(FavardError):
    pass


class EmptySector(FavardError):
    pass


class DegeneratePair(FavardError):
    pass


class InsufficientData(FavardError):
    pass


class NonConvergenceWarning(UserWarning):
    """Quadrature hit its refinement cap; the value is returned but flagged."""
