"""Exception types shared across the toolkit."""


class InvalidArgument(ValueError):
    """Raised when an input violates a documented precondition."""


class DegenerateInput(ValueError):
    """Raised when a formula is undefined for the given data (empty class, zero norm, ...)."""


class SingularMatrix(ArithmeticError):
    """Raised when a linear system has no unique solution."""


class ConvergenceFailure(RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class StateError(RuntimeError):
    """Raised when a model is used before it has been fitted."""


class ParseError(ValueError):
    """Malformed input file; carries the offending location."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc = f"{path}"
            if line is not None:
                loc += f":{line}"
            loc += ": "
        super().__init__(loc + message)
        self.path = path
        self.line = line
