"""Exception hierarchy.

``exit_code`` is what the command line front end returns when the error
escapes an analysis.
"""


class QdsError(Exception):
    exit_code = 3


class DimensionError(QdsError, ValueError):
    exit_code = 2


class NotFaithfulError(QdsError, ValueError):
    exit_code = 2


class ValidationError(QdsError, ValueError):
    """Bad model input. ``path`` locates the offending field in the model file."""

    exit_code = 2

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class HypothesisError(QdsError):
    """A structural hypothesis (ergodicity, detailed balance, ...) fails."""

    exit_code = 2


class NumericalError(QdsError):
    exit_code = 3


class DegenerateEigenvalueError(NumericalError):
    pass


class InputOutputError(QdsError, OSError):
    """Unreadable input, unwritable output, or a refused overwrite."""

    exit_code = 4
