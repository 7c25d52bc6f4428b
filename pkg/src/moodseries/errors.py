"""Exception hierarchy.

``DataError`` covers everything caused by bad input (exit code 2 on the
command line); anything else escaping the CLI is treated as internal.
"""


class DataError(Exception):
    """Input data could not be used."""


class LexiconError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(DataError):
    pass


class TimestampError(DataError):
    pass


class RangeError(DataError):
    """A date, period or window falls outside the data it refers to."""


class StageError(DataError):
    """Pipeline stage failure; ``stage`` names where it happened."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
