"""Error terms of arithmetic counting functions and their random models."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AccumulatorOverflowError,
    DegenerateInputError,
    ErrorlabError,
    OutOfRangeError,
    PrecisionError,
    ResourceBudgetError,
    StorageError,
    UsageError,
)

__all__ = [
    "__version__",
    "AccumulatorOverflowError",
    "DegenerateInputError",
    "ErrorlabError",
    "OutOfRangeError",
    "PrecisionError",
    "ResourceBudgetError",
    "StorageError",
    "UsageError",
]
