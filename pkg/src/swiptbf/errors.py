"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Malformed or inconsistent input data."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or lost accuracy."""

    def __init__(self, message, iterations=None, residuals=None):
        super().__init__(message)
        self.iterations = iterations
        self.residuals = residuals


class InfeasibleTargetError(RuntimeError):
    """The secrecy-rate target cannot be met; carries the feasible ceiling."""

    def __init__(self, message, r_max=None):
        super().__init__(message)
        self.r_max = r_max


class SchemeInapplicableError(RuntimeError):
    """A closed-form scheme's structural precondition (e.g. K < M) fails."""


class DegenerateChannelError(RuntimeError):
    """Channel geometry breaks a closed-form construction."""


class ReconstructionError(RuntimeError):
    """Rank-one reconstruction failed; carries eigenvalue diagnostics."""

    def __init__(self, message, eigenvalues=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues


class SolverStateError(RuntimeError):
    """Operation requires a solver result in a different state."""
