class CntFlowError(Exception):
    """Base class for every error raised by the solver suite"""


class InvalidInputError(CntFlowError, ValueError):
    """A parameter, name, shape or range is not acceptable"""


class DegenerateCoefficientError(CntFlowError):
    """A coefficient that must stay positive collapsed to zero or below"""


class SingularBlockError(CntFlowError):
    """A diagonal block of the block-tridiagonal factorization is singular"""

    def __init__(self, block_index, message=None):
        self.block_index = block_index
        super().__init__(message or f"singular pivot block at index {block_index}")


class SolverFailureError(CntFlowError):
    """The Newton iteration could not continue"""

    def __init__(self, iteration, message):
        self.iteration = iteration
        super().__init__(f"iteration {iteration}: {message}")


class IntegrationBlowUpError(CntFlowError):
    """The initial-value integration left the representable range"""

    def __init__(self, eta_reached, message=None):
        self.eta_reached = eta_reached
        super().__init__(
            message or f"state magnitude exceeded the blow-up limit at eta = {eta_reached:.4f}"
        )


class NonConvergenceError(CntFlowError):
    """Raised by the command layer when a solve ends unconverged"""
