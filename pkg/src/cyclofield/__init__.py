"""Cyclical long-range dependent isotropic Gaussian random fields.

Numerical toolkit around singular product-form spectral densities:
evaluation and validation of the densities themselves, covariance functions
and averaged-functional variances, weight-kernel pairs with Hankel
inversion, covariance-convergence diagnostics for the scaled weighted
functionals, and an independent Monte Carlo field simulator.
"""

from .quad import ConvergenceError, IntegralResult, QuadratureSpec
from .spectral import (
    CyclicalSpectralDensity,
    LrdClassification,
    RadialProfile,
    SpectralFunctionValue,
    eval_Phi,
    eval_phi,
    get_density,
    lrd_diagnostic,
    make_density,
    registry,
    spectral_mass,
    sphere_surface,
)
from .covariance import (
    CovarianceCurve,
    audit_closed_forms,
    closed_form,
    covariance_Bn,
    functional_bn,
    functional_ln,
    lrd_integral_check,
)
from .weights import (
    KernelAdmissibilityError,
    WeightKernel,
    bessel_kernel,
    callable_kernel,
    certify,
    forward_check,
    invert_to_weight,
    square_integral,
    table_kernel,
)
from .limits import (
    CovarianceMatrixResult,
    NormalizedFunctionalSpec,
    convergence_diagnostic,
    degeneration_diagnostic,
    finite_r_cov,
    limit_cov,
    v_constant,
)
from .sim import (
    FieldRealization,
    HarmonicFieldSampler,
    build_sampler,
    empirical_cov,
    evaluate,
    jackknife_mean,
    mc_functional,
)

__version__ = "0.1.0"
