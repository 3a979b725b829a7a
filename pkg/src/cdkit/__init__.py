"""cdkit: numerical verification of curvature-dimension inequalities under
integral curvature excess, on exactly-constructed interval fixtures."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .comparison_ode import (
    CurvatureProfile,
    ExtCoeff,
    SinSolution,
    check_sigma_concavity,
    model_pi,
    model_sin,
    model_volume,
    sigma,
    solve_generalized_sin,
    tau,
)
from .mm_core import (
    FiniteMmSpace,
    OneDimMmSpace,
    SpikedProfile,
    excess_k,
    excess_k_pointed,
    make_cd_fixture,
    make_model_space,
    make_spiked_profile,
    make_warped_product,
    normalize,
    normalize_pointed,
    rescale,
)
from .one_dim_bounds import (
    ComparisonContext,
    PsiFunction,
    check_dist_coeff_bound,
    check_integrated_bound,
    check_lemma_B,
    check_pwa,
    const_C,
    const_C_prime,
    const_Lambda,
    omega,
    psi,
)
from .cd_verify import (
    check_bishop_gromov,
    check_brunn_minkowski,
    check_cd_inequality,
    check_mcp,
    check_resultA,
    convergence_experiment,
)
from .report import VerificationReport
from .transport import (
    Coupling,
    DiscreteMeasure,
    DynamicalPlan1D,
    coupling_transfer,
    gw_surrogate,
    interpolate,
    renyi_entropy,
    sturm_D_upper,
    w2_1d,
    w2_exact,
)

__version__ = "0.1.0"
