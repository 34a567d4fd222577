"""Exception types raised across the package."""


class InvalidArgument(ValueError):
    """Bad input: non-finite vectors, shape mismatches, points outside dom(phi)."""


class NotAvailable(RuntimeError):
    """A requested quantity has no closed form for this object."""


class ParseError(ValueError):
    """Malformed libsvm input."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalBreakdown(ArithmeticError):
    """Non-finite arithmetic inside an iteration."""

    def __init__(self, message, iteration=None):
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)
        self.iteration = iteration


class LinesearchFailure(RuntimeError):
    """Backtracking exhausted its budget without accepting a step.

    ``trial`` carries the diagnostics of the last evaluated trial.
    """

    def __init__(self, message, trial=None, iteration=None):
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)
        self.trial = trial
        self.iteration = iteration
