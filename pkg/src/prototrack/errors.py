"""Exception types raised across the package."""


class TrackError(Exception):
    pass


class ZeroVectorError(TrackError, ValueError):
    pass


class DomainError(TrackError, ValueError):
    pass


class EmptyMaskError(TrackError, ValueError):
    pass


class BadShapeError(TrackError, ValueError):
    pass


class SequenceError(TrackError, ValueError):
    pass


class MissingEntryError(TrackError, KeyError):
    pass


class BadPromptError(TrackError, ValueError):
    pass


class LengthMismatchError(TrackError, ValueError):
    pass


class ParseError(TrackError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(TrackError, ValueError):
    pass
