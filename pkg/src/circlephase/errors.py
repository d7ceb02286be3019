"""Exception types shared across the package."""


class CirclePhaseError(Exception):
    """Base class for all package-specific errors."""


class QuadratureConvergenceError(CirclePhaseError):
    """Adaptive quadrature ran out of subdivisions.

    Carries the best available estimate and a bound on its error so callers
    can still inspect the partial result.
    """

    def __init__(self, message, best_estimate, error_bound):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_bound = error_bound


class NearDependenceError(CirclePhaseError):
    """Node selection could not find a pivot above tolerance."""


class CertificationError(CirclePhaseError):
    """No window half-width could be certified before the underflow floor."""


class ConstructionError(CirclePhaseError):
    """The smoothing width for the masked sign phase underflowed."""


class SolverFailure(CirclePhaseError):
    """An iterative solver exhausted its budget.

    A solution is known to exist, so this signals insufficient budget rather
    than absence; `best` and `best_residual` hold the closest iterate found.
    """

    def __init__(self, message, best=None, best_residual=None):
        super().__init__(message)
        self.best = best
        self.best_residual = best_residual


class ConsistencyError(CirclePhaseError):
    """Two supposedly-equal internal computations disagreed beyond tolerance."""

    def __init__(self, message, direct, decomposed):
        super().__init__(message)
        self.direct = direct
        self.decomposed = decomposed
