"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: bad input data exits 3, embedding
provider failures exit 4, usage mistakes exit 2 (handled by click).
"""


class BuglocError(Exception):
    """Base class for every error raised by this package."""


class DataError(BuglocError):
    """Unusable input: unreadable files, schema violations, bad config values."""


class ProviderError(BuglocError):
    """Embedding provider failure: transport errors, wrong dimensions, bad values."""


class TrainingDiverged(BuglocError):
    """Training produced a non-finite loss; carries the offending step."""

    def __init__(self, message: str, epoch: int, batch_index: int):
        super().__init__(message)
        self.epoch = epoch
        self.batch_index = batch_index
