"""Exception hierarchy for urnedge."""


class UrnEdgeError(Exception):
    """Base class for all urnedge errors."""


class NonpositiveShape(UrnEdgeError):
    """A cell shape parameter (p_m, omega_m or d_m) is not positive."""


class InfeasibleTotal(UrnEdgeError):
    """The conditioning total n cannot be reached by the cell variables."""


class OrderTooHigh(UrnEdgeError):
    """A moment of order beyond the supported maximum was requested."""


class DegenerateStatistic(UrnEdgeError):
    """The residual variance sigma_N^2 vanishes (affine kernel)."""


class SupportTooShort(UrnEdgeError):
    """A kernel value table does not cover the truncated cell support."""


class MissingMoments(UrnEdgeError):
    """The centered statistic lacks the joint moments an operation needs."""


class UnsupportedOrder(UrnEdgeError):
    """Expansion order s outside {3, 4, 5}."""


class OffLattice(UrnEdgeError):
    """A point mass was requested at a value not on the statistic lattice."""


class StateBudgetExceeded(UrnEdgeError):
    """The exact-distribution DP grew beyond the configured state budget."""

    def __init__(self, size, budget):
        super().__init__(f"DP state size {size} exceeds budget {budget}")
        self.size = size
        self.budget = budget


class NonRepresentableValues(UrnEdgeError):
    """Kernel values are not on a common lattice of the requested step."""


class QuadratureNotConverged(UrnEdgeError):
    """Panel doubling did not reach the requested relative tolerance."""


class MismatchBeyondTolerance(UrnEdgeError):
    """An unflagged closed-form field disagrees with the generic engine."""
