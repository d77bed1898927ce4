"""Exception types raised across the package."""


class MillwatchError(Exception):
    """Base class for all package errors."""


class ConfigError(MillwatchError, ValueError):
    """Invalid configuration values."""


class ParseError(MillwatchError, ValueError):
    """Malformed input file. ``row`` is the zero-based offending row, if known."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class InsufficientDataError(MillwatchError, ValueError):
    pass


class StratificationError(MillwatchError, ValueError):
    pass


class DimensionError(MillwatchError, ValueError):
    pass


class StageError(MillwatchError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


class MissingArtifactError(MillwatchError, FileNotFoundError):
    """A stage input is absent from the run directory."""

    def __init__(self, name, run_dir):
        super().__init__(f"missing artifact {name!r} in {run_dir}; run the producing stage first")
        self.artifact = name
