class WodError(Exception):
    """Base class; ``exit_code`` is what the CLI returns."""

    exit_code = 1
    stage = "pipeline"

    def __init__(self, message, stage=None):
        super().__init__(message)
        if stage is not None:
            self.stage = stage


class ConfigError(WodError, ValueError):
    exit_code = 1
    stage = "config"


class DataError(WodError, ValueError):
    exit_code = 2
    stage = "data"


class NumericError(WodError, ArithmeticError):
    exit_code = 3
    stage = "numeric"
