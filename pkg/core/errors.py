"""
SEQMEM - ERRORS
"""

from typing import List, Tuple


class SeqMemError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(SeqMemError, ValueError):
    pass


class ParameterError(SeqMemError, ValueError):
    pass


class CapExceededError(SeqMemError, ValueError):
    pass


class FormatError(SeqMemError, ValueError):
    pass


class BoundSearchError(SeqMemError, RuntimeError):
    pass


class UnmemorizableError(SeqMemError):
    """
    An all-zero predecessor column must be followed by a nonzero column.
    `pairs` holds (n-1, n) column indices, 1-based.
    """

    def __init__(self, pairs: List[Tuple[int, int]]):
        self.pairs = list(pairs)
        super().__init__(
            f"Structurally unmemorizable: zero column(s) followed by firing at {self.pairs}"
        )
