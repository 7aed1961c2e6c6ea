"""Exception hierarchy.  The CLI maps each family to an exit code."""


class NielsenHypError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class SpecError(NielsenHypError, ValueError):
    """Malformed space spec, word, or other user input."""

    exit_code = 2


class PreconditionError(NielsenHypError, ValueError):
    """An operation was called outside its stated hypothesis."""

    exit_code = 2


class WindowError(NielsenHypError):
    """A computation left the finite window it was given (enlarge it)."""

    exit_code = 3


class CapExceeded(NielsenHypError):
    """An enumeration would exceed its configured size cap."""

    exit_code = 3


class BudgetExhausted(NielsenHypError):
    """A search ran out of rounds; ``partial`` holds the best state so far."""

    exit_code = 3

    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


class Indeterminate(NielsenHypError):
    """A certificate could neither be confirmed nor refuted."""

    exit_code = 4
