"""Exception hierarchy shared by every module.

The CLI maps each class to a fixed exit code, so new errors should
subclass one of these rather than raising bare built-ins.
"""


class SumsetLabError(Exception):
    """Base class for all errors raised by the package."""

    exit_code = 2


class SpecError(SumsetLabError, ValueError):
    """Malformed DSL string, JSON document or invalid argument."""

    exit_code = 2


class WindowOverflowError(SumsetLabError):
    """A query reached outside the window on which data is known."""

    exit_code = 3


class BoundExceededError(SumsetLabError):
    """A search space or budget is larger than the configured limit."""

    exit_code = 4
