"""Exception hierarchy shared by every module."""


class OverparamError(Exception):
    """Base class for all library errors."""


class InputError(OverparamError, ValueError):
    """Invalid arguments or malformed inputs."""


class ParseError(InputError):
    """A data file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(InputError):
    """Parsed data violates a dataset invariant."""


class SingularMatrixError(InputError):
    """A matrix required to be positive definite is not."""

    def __init__(self, min_eigenvalue):
        super().__init__(
            f"matrix is not positive definite (min eigenvalue {min_eigenvalue:.3e})"
        )
        self.min_eigenvalue = min_eigenvalue


class DivergenceError(OverparamError, RuntimeError):
    """Gradient descent produced a non-finite or exploding loss."""

    def __init__(self, step, loss):
        super().__init__(f"training diverged at step {step} (loss_sq={loss!r})")
        self.step = step
        self.loss = loss
