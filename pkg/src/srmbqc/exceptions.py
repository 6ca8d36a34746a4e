"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operands act on different numbers of qubits."""


class CapacityError(ValueError):
    """Dense representation requested beyond the supported size."""


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class ReachabilityError(ValueError):
    """Target does not lie in the subgroup generated by the frame."""


class GeodesicSolverError(RuntimeError):
    """Boundary-value geodesic search found no solution.

    ``diagnostics`` holds a short summary of the residual landscape.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
