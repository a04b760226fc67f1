"""Asymptotic spectra and isotropic mutual information of operator-valued
Kronecker channel models.

The model ``H = R X T`` is treated with matrix-valued Cauchy transforms:
closed forms for the correlation part ``Q`` and the circular part ``X^``,
subordination fixed points for their sums and products, and Stieltjes
inversion back to a spectral density.  A Monte Carlo oracle samples the
corresponding block random matrices.
"""

__version__ = "0.1.0"

from .matrix import (
    Tolerances,
    TOLERANCES,
    SingularMatrixError,
    NotHermitianError,
    inverse,
    in_upper_half_plane,
    normalized_trace,
    hermitian_eigenvalues,
)
from .scalar import (
    ScalarMeasure,
    DensityEstimate,
    DomainError,
    cauchy_of_measure,
    cauchy_mp,
    stieltjes_invert,
    discretize_uniform01,
)
from .opvalued import (
    MatrixCauchyMap,
    cauchy_r_times_unit,
    cauchy_Q_diagonal,
    cauchy_Xhat_kl,
    r_transform,
    h_transform,
    extend_reflect,
)
from .subordination import (
    FixedPointResult,
    FixedPointConfig,
    ConvergenceError,
    HalfPlaneError,
    additive_subordinator,
    multiplicative_subordinator,
)
from .pipeline import (
    Block,
    ChannelModel,
    MutualInfoCurve,
    build_model,
    cauchy_Xhat,
    scalar_cauchy_HHstar,
    spectral_density,
    mutual_information,
    classical_kronecker_reference,
)
from .montecarlo import (
    McConfig,
    sample_channel,
    empirical_spectrum,
    mc_mutual_info,
    entrywise_exp,
    gamma_bulk_bound_check,
    gamma_top_singular_check,
    gamma_infinity_moment,
)
