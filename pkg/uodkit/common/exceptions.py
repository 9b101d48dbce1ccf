class UodkitError(Exception):
    """Base exception for all uodkit errors."""

    pass


class TensorError(UodkitError):
    """Base exception for tensor arithmetic errors."""

    pass


class ShapeMismatchError(TensorError):
    """Raised when an operand has the wrong size along a named axis."""

    def __init__(self, axis: str, expected, actual, op: str = ""):
        self.axis = axis
        self.expected = expected
        self.actual = actual
        self.op = op
        where = f"{op}: " if op else ""
        super().__init__(
            f"{where}shape mismatch on axis '{axis}': expected {expected}, got {actual}"
        )


class NonFiniteError(TensorError):
    """Raised when a NaN or Inf shows up where finite values are required."""

    def __init__(self, index, what: str = "value"):
        self.index = index
        super().__init__(f"non-finite {what} at element {index}")


class PrecisionError(TensorError):
    """Raised when an operation needs 64-bit floats and got something else."""

    pass


class ImageError(UodkitError):
    """Base exception for image handling errors."""

    pass


class ImageIOError(ImageError):
    """Custom exception for errors reading or writing image files."""

    pass


class ParamFileError(UodkitError):
    """Raised for unreadable or inconsistent parameter files."""

    def __init__(self, path, reason: str):
        self.path = path
        super().__init__(f"{path}: {reason}")


class InvalidBoxError(UodkitError):
    """Raised for boxes with x2 < x1 or y2 < y1."""

    pass


class InputSizeError(UodkitError):
    """Raised when the detector receives an image of the wrong size."""

    pass


class TrainingDivergedError(UodkitError):
    """Raised when the training loss stops being finite."""

    def __init__(self, step: int, loss: float):
        self.step = step
        self.loss = loss
        super().__init__(f"training diverged at step {step} (loss={loss})")


class AnnotationFormatError(UodkitError):
    """Raised for malformed annotation or prediction files."""

    def __init__(self, path, line: int, reason: str):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {reason}")


class ValidationFailure(UodkitError):
    """Raised when a gradient or loss validation suite fails."""

    def __init__(self, failed: list[str]):
        self.failed = failed
        super().__init__(f"validation failed: {', '.join(failed)}")
