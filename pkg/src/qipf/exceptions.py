"""Exception hierarchy.

Every error carries a short machine-parsable ``category`` used by the CLI
when it reports a failure on a single line.
"""


class QIPFError(Exception):
    category = "error"


class InvalidParameterError(QIPFError, ValueError):
    category = "invalid-parameter"


class ShapeError(QIPFError, ValueError):
    category = "shape"


class DegenerateDataError(QIPFError, ValueError):
    category = "degenerate-data"


class UndefinedMetricError(QIPFError, ValueError):
    category = "undefined-metric"


class ParseError(QIPFError, ValueError):
    category = "parse"


class DataError(QIPFError, ValueError):
    category = "data"


class TrainingDivergedError(QIPFError, RuntimeError):
    category = "training-diverged"

    def __init__(self, epoch, message=None):
        self.epoch = epoch
        super().__init__(message or f"loss became non-finite at epoch {epoch}")
