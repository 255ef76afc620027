"""RKHS machinery for Gaussian priors on [0,1].

Spectral bases of covariance operators, truncated series sampling,
small-ball probabilities, concentration functions and contraction-rate
solving, with exact structural checks of the underlying identities.
"""

__version__ = "0.1.0"

from .backend import BACKEND_NAME, derive_stream
from .concentration import (
    ConcentrationPoint,
    InfeasibleApproximationError,
    RateSolution,
    approx_term,
    combined_rate,
    concentration_fn,
    ellipsoid_entropy,
    ellipsoid_packing,
    exponent_translate,
    fit_loglog,
    solve_rate,
)
from .grid import (
    Grid,
    GridFunction,
    GridMismatchError,
    grid_function,
    index_grid,
    inner_l2,
    make_grid,
    norm,
)
from .kernels import (
    BrownianMotion,
    FiniteDimCovariance,
    IntegratedBrownianMotion,
    ReleasedBrownianMotion,
    RiemannLiouville,
    SeriesKernel,
    gram,
    kernel_eval,
    parse_kernel,
    sup_variance,
)
from .rkhs import (
    NotInRkhsError,
    RkhsElement,
    direct_sum_norm,
    element_from_function,
    finite_dim_norm,
    pushforward_integrate,
    rkhs_norm_bm,
    rkhs_norm_intbm_released,
    rkhs_norm_released,
    rkhs_norm_series,
    shared_basis_sum_eigs,
)
from .sampler import KLDraw, cm_log_ratio, cm_log_ratio_batch, sample_exact, sample_kl
from .smallball import (
    CheckReport,
    SmallBallEstimate,
    check_borell,
    check_sandwich,
    check_shift_inequality,
    check_tail,
    smallball_mc,
    wilson_interval,
)
from .spectral import SpectralBasis, eig_basis, project, reconstruct
from .verify_structure import (
    check_direct_sum,
    check_isometry_integration,
    check_shared_basis_counterexample,
)
