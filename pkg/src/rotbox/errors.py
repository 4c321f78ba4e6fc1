"""Exception types shared across the package."""


class RotboxError(Exception):
    """Base class for all errors raised by this package."""


class InvalidBoxError(RotboxError):
    """A box has non-finite fields or non-positive sides."""


class InvalidQuadError(RotboxError):
    """A quadrilateral is degenerate or self-intersecting."""


class InvalidArgumentError(RotboxError):
    """An argument violates a documented precondition."""


class ShapeError(RotboxError):
    """An array has the wrong shape or layout for the requested operation."""


class AnnotationParseError(RotboxError):
    """A text annotation line could not be parsed.

    Carries the 1-based line number and column of the offending token so
    callers can point at the exact spot in the file.
    """

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class TrainingDivergedError(RotboxError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, loss: float):
        super().__init__(f"non-finite loss {loss!r} at epoch {epoch}")
        self.epoch = epoch
        self.loss = loss


class ContractViolationError(RotboxError):
    """Caller passed structurally inconsistent inputs (e.g. mismatched lists)."""
