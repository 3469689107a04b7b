"""Configuration-space calculus: star-convolution algebra, K-transform,
Lebesgue-Poisson and Poisson measures, and the spectral theory of the
operator family ``A(phi) f = phi * f``."""

from .algebra import (
    Character,
    ConfigFunction,
    FiniteConfiguration,
    character,
    configuration,
    indicator,
    involution,
    random_function,
    star,
    unit,
)
from .ground import (
    ContinuousSpace,
    ExactSpace,
    QuadratureWarning,
    TestFunction,
    Window,
    integrate,
    intensity_of,
    pairing,
)
from .ktransform import ConfigObservable, KernelFunction, homomorphism_residual, k_apply, k_inverse
from .lebesgue_poisson import lambda_total, lp_integral, project
from .moments import (
    GramOperatorBundle,
    PositivityError,
    character_norm_bound,
    commutator_residual,
    gram_matrix,
    inner_product,
    operator_matrix,
    s_apply,
    symmetry_residual,
)
from .process import (
    ProcessSampler,
    SampleBatch,
    consistency_check,
    finite_mass_trend,
    lp_p_residual,
    laplace_estimate,
    sample,
)
from .spectral import (
    DegeneracyError,
    SpectralReport,
    bernoulli_residual,
    exp_series_identity,
    joint_diagonalize,
    laplace_of_rho,
)

__version__ = "0.1.0"

__all__ = [
    "bernoulli_residual",
    "Character",
    "character",
    "character_norm_bound",
    "commutator_residual",
    "ConfigFunction",
    "ConfigObservable",
    "configuration",
    "consistency_check",
    "ContinuousSpace",
    "DegeneracyError",
    "ExactSpace",
    "exp_series_identity",
    "finite_mass_trend",
    "FiniteConfiguration",
    "gram_matrix",
    "GramOperatorBundle",
    "homomorphism_residual",
    "indicator",
    "inner_product",
    "integrate",
    "intensity_of",
    "involution",
    "joint_diagonalize",
    "k_apply",
    "k_inverse",
    "KernelFunction",
    "lambda_total",
    "laplace_estimate",
    "laplace_of_rho",
    "lp_integral",
    "lp_p_residual",
    "operator_matrix",
    "pairing",
    "PositivityError",
    "ProcessSampler",
    "project",
    "QuadratureWarning",
    "random_function",
    "s_apply",
    "sample",
    "SampleBatch",
    "SpectralReport",
    "star",
    "symmetry_residual",
    "TestFunction",
    "unit",
    "Window",
]
