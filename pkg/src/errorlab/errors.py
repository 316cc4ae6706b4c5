"""Error taxonomy shared across the package.

The CLI maps UsageError (and argparse failures) to exit code 2 and every
other ErrorlabError to exit code 3; library callers can catch the specific
classes.
"""


class ErrorlabError(Exception):
    """Base class for all package-specific failures."""


class UsageError(ErrorlabError, ValueError):
    """Invalid argument or malformed configuration."""


class OutOfRangeError(ErrorlabError, ValueError):
    """A precondition on parameter ranges failed (e.g. no crossing on a grid)."""


class PrecisionError(ErrorlabError, ArithmeticError):
    """A certified error budget was exceeded or quadrature failed to converge."""


class ResourceBudgetError(ErrorlabError, RuntimeError):
    """A configured work or memory cap would be exceeded."""


class AccumulatorOverflowError(ErrorlabError, OverflowError):
    """An exact integer accumulation would exceed its guaranteed-exact range."""


class DegenerateInputError(ErrorlabError, ValueError):
    """An operation received input that leaves nothing to compute (e.g. all samples clipped)."""


class StorageError(ErrorlabError, RuntimeError):
    """A persisted artifact is missing, corrupt, or fails validation."""
