"""Edgeworth expansions for decomposable statistics in generalized urn
models, with exact convolution oracles, samplers and applicability gates.
"""

from .catalog import (
    ChiSqParams,
    DiffReport,
    DixonParams,
    SampleSumParams,
    chisq_closed_form,
    cross_check,
    dixon_closed_form,
    samplesum_closed_form,
)
from .centering import CenteredStat, center, check_orthogonality, joint_alpha
from .diagnostics import BoundReport, gates, m_inf, norm_moments
from .errors import (
    DegenerateStatistic,
    InfeasibleTotal,
    MismatchBeyondTolerance,
    MissingMoments,
    NonpositiveShape,
    NonRepresentableValues,
    OffLattice,
    OrderTooHigh,
    QuadratureNotConverged,
    StateBudgetExceeded,
    SupportTooShort,
    UnsupportedOrder,
    UrnEdgeError,
)
from .expansion import (
    ExpansionResult,
    build_p,
    build_w,
    cdf_expansion,
    cdf_expansion_deriv,
    lattice_cdf_corrected,
    pmf_expansion,
    tau_integrate,
)
from .kernels import (
    CompoundSumKernel,
    IncrementLaw,
    IndicatorKernel,
    Kernel,
    PowerKernel,
    TableKernel,
    kernel_from_json,
)
from .models import (
    CellLaw,
    GumSpec,
    calibrate,
    cell_central_moment,
    cell_charfn,
    cell_cumulants,
    cell_pmf,
    cell_support,
    gum_from_json,
)
from .oracle import ExactDist, conditional_charfn, exact_pmf, local_prob, sample
from .polynomials import ItPolynomial, hermite_he, sawtooth_s1

__version__ = "0.1.0"
