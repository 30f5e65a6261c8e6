"""Exception hierarchy. ``category`` drives the CLI exit code."""


class BodywheelError(Exception):
    category = "generic"


class FormatError(BodywheelError):
    """A file does not conform to its declared on-disk format."""

    category = "format"


class MalformedHeaderError(FormatError):
    pass


class ChannelCountError(FormatError):
    def __init__(self, row: int, expected: int, got: int):
        super().__init__(f"row {row}: expected {expected} channels, got {got}")
        self.row = row


class NonMonotonicTimestampError(FormatError):
    def __init__(self, row: int, t_prev: float, t: float):
        super().__init__(f"row {row}: timestamp {t!r} does not increase past {t_prev!r}")
        self.row = row


class ValidationError(BodywheelError):
    """Rejected input: violates a documented precondition or invariant."""

    category = "validation"


class UnknownGestureError(ValidationError):
    pass


class CalibrationWindowError(ValidationError):
    pass


class DegenerateCalibrationError(ValidationError):
    pass


class DimensionMismatchError(ValidationError):
    pass


class StreamOrderError(ValidationError):
    """Out-of-order or non-finite sample fed to a streaming operation."""


class WorldError(ValidationError):
    pass


class SelfIntersectingPathError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class ProtocolError(BodywheelError):
    category = "protocol"
