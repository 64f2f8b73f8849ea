"""Exception types shared by the solver modules."""


class InvalidParameters(ValueError):
    """Raised for couplings, grids or profiles that violate a precondition."""


class NonConvergence(RuntimeError):
    """Iteration cap reached with tolerances unmet.

    ``partial`` carries whatever result the solver had when it gave up, so
    callers can still write it out.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class SingularJacobian(RuntimeError):
    """The Newton system could not be factorized."""


class WindowTooShort(ValueError):
    """A least-squares fit window holds fewer nodes than required."""
