"""Exception types shared across the package."""


class NewsflowError(Exception):
    """Base class for all package-specific errors."""


class UsageError(NewsflowError):
    """Invalid arguments, configuration, or input that the caller must fix."""


class FitFailure(NewsflowError):
    """A statistical fit could not be performed on the given sample."""


class EmptyResult(NewsflowError):
    """An operation had no eligible data to work on."""


class DegenerateInput(NewsflowError):
    """Input is structurally valid but statistically degenerate (e.g. zero variance)."""
