"""Exception hierarchy.

Every failure carries a human-readable ``detail`` and the process exit code
the command line maps it to:

- 2: input errors (bad files, bad shapes, bad arguments)
- 3: numerical or conditioning errors
- 4: missing or incompatible critical-value tables
"""


class AnalysisError(Exception):
    """Base error with a detail message and an exit code."""

    exit_code = 1

    def __init__(self, detail: str, exit_code: int | None = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def with_stage(self, stage: str) -> "AnalysisError":
        """Return a copy of this error whose detail is prefixed by a stage name."""
        err = type(self)(f"[{stage}] {self.detail}", self.exit_code)
        err.__cause__ = self
        return err


class InputError(AnalysisError):
    exit_code = 2


class ParseError(InputError):
    """A cell or argument could not be parsed."""


class MissingValueError(InputError):
    """A data cell is empty."""


class DimensionError(InputError):
    """Shapes do not agree or a size is out of range."""


class NumericalError(AnalysisError):
    exit_code = 3


class ConditioningError(NumericalError):
    """A matrix that must be inverted is numerically singular."""


class IdentificationError(NumericalError):
    """A normalization matrix b'ψ or c'β is singular."""


class ConvergenceError(NumericalError):
    pass


class TableError(AnalysisError):
    """Critical-value table missing, incomplete or of the wrong version."""

    exit_code = 4
