"""Exception types shared across engines and the command line."""


class UsageError(ValueError):
    """Bad parameters or configuration supplied by the caller."""


class IntegrityError(RuntimeError):
    """A physics invariant (positivity, oracle agreement) failed at run time."""


class ResourceError(RuntimeError):
    """Requested problem is too large for exact enumeration."""
