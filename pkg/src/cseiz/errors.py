"""Exception types shared across the package."""


class CseizError(Exception):
    """Base class for all package errors."""


class EdfParseError(CseizError):
    """Malformed or truncated EDF input. Carries the byte offset of the
    offending header field when known."""

    def __init__(self, message, byte_offset=None):
        if byte_offset is not None:
            message = f"{message} (at byte offset {byte_offset})"
        super().__init__(message)
        self.byte_offset = byte_offset


class ChannelNotFoundError(CseizError):
    """Requested channel label absent from an EDF file."""

    def __init__(self, channel, available):
        super().__init__(
            f"channel {channel!r} not found; available channels: "
            + ", ".join(repr(c) for c in available)
        )
        self.channel = channel
        self.available = list(available)


class SummaryParseError(CseizError):
    """Malformed annotation summary text. Carries the 1-based line number."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class ConfigurationError(CseizError):
    """Invalid detector / filter / pump configuration."""


class CalibrationError(CseizError):
    """Calibration cannot proceed (e.g. no annotated seizures)."""


class SequencingError(CseizError):
    """Out-of-order input where monotone order is required."""
