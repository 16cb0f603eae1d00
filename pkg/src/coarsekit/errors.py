"""Exception hierarchy shared by every module; the CLI maps these to exit codes."""


class CoarseKitError(Exception):
    exit_code = 1


class MalformedInputError(CoarseKitError, ValueError):
    """Input data violates a schema (missing distances, unknown ids, bad shapes)."""

    exit_code = 2


class PreconditionError(CoarseKitError, ValueError):
    """A documented precondition of an operation does not hold."""

    exit_code = 3


class ConstructionError(PreconditionError):
    """A certified construction could not be completed, e.g. retries exhausted."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}


class PostconditionError(PreconditionError):
    """An operation produced output that fails its own certificate."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}


class CapacityError(CoarseKitError, ValueError):
    """Input exceeds a hard size cap of an exhaustive routine."""

    exit_code = 4
