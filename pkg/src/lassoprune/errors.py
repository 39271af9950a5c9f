"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operands or files have incompatible/illegal dimensions."""


class ParameterError(ValueError):
    """A numeric argument is outside its legal range (or non-finite)."""


class GraphError(ValueError):
    """A pruning unit is wired inconsistently (bad edge, cycle, dim clash)."""


class FormatError(ValueError):
    """An array file violates the on-disk format. Carries the byte offset."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class NumericalError(ArithmeticError):
    """The solver produced non-finite iterates."""


class OracleError(RuntimeError):
    """The reference coordinate-descent solver failed to converge."""


class ConvergenceWarning(UserWarning):
    """An iterative routine hit its iteration cap before its tolerance."""
