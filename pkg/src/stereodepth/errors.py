"""Exception types raised across the package."""


class StereoError(ValueError):
    """Base class for all package errors."""


class NonPositiveDisparity(StereoError):
    pass


class InsufficientData(StereoError):
    pass


class SingularSystem(StereoError):
    pass


class LengthMismatch(StereoError):
    pass


class EmptyInput(StereoError):
    pass


class InvalidEstimate(StereoError):
    pass


class InvalidResolution(StereoError):
    pass


class OutOfFrame(StereoError):
    pass


class ParseError(StereoError):
    """Malformed text input. ``line`` is 1-based, or None when unknown."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
