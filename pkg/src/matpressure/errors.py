"""Exception types shared by the library and mapped to CLI exit codes."""


class MatPressureError(Exception):
    exit_code = 1


class InputError(MatPressureError, ValueError):
    """Malformed or out-of-range input."""

    exit_code = 2


class PreconditionError(InputError):
    """An operation was called outside the regime it is defined for."""


class NumericalFailure(MatPressureError, ArithmeticError):
    """A numerical contract (residual, finiteness) could not be met."""

    exit_code = 3

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SearchFailure(NumericalFailure):
    pass


class BudgetExceeded(MatPressureError):
    """Enumeration or matrix size exceeds the configured budget."""

    exit_code = 4
