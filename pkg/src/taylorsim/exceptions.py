"""Exception hierarchy shared by every stage of the pipeline."""


class TaylorSimError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(TaylorSimError, ValueError):
    """An argument violates a documented precondition."""


class ParseError(InvalidInputError):
    """An instance document or Pauli word could not be parsed.

    ``path`` is the JSON-pointer-like location of the offending field.
    """

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class InstanceTooLargeError(InvalidInputError):
    """An LCU expansion or circuit register would exceed the dense budget."""


class PlanInfeasibleError(TaylorSimError):
    """A schedule violates a feasibility condition (for example s > 2)."""


class ConsistencyError(TaylorSimError):
    """A proven inequality or internal identity failed numerically.

    ``stage`` names the pipeline stage; ``measured`` and ``bound`` carry the
    offending numbers when there are any.
    """

    def __init__(self, message, stage="", measured=None, bound=None):
        self.stage = stage
        self.measured = measured
        self.bound = bound
        prefix = f"[{stage}] " if stage else ""
        super().__init__(prefix + message)
