"""Taylor-Abel-Poisson means and related block multipliers on the torus T^d."""

from .spectral import (
    SampleField,
    SpectralFunction,
    analyze,
    in_Y,
    l1_degree,
    lp_norm,
    norm,
    partial_sum,
    project_Y,
    random_function,
    synthesize,
)
from .operators import (
    BlockMultiplier,
    TapParameters,
    apply_block_multiplier,
    kernel_convolution,
    lambda_coeff,
    lambda_sequence,
    leis_mean,
    poisson_mean,
    poisson_rho_derivative,
    radial_derivative,
    tap_mean,
    taylor_form,
    y_poisson_kernel,
)
from .analysis import (
    Modulus,
    check_modulus_conditions,
    k_functional,
    lemma5_sandwich,
    m_p,
    multiplier_norm,
    parse_modulus,
    remainder_integral,
    zbs_check,
)
from .experiments import (
    DecaySpec,
    RateReport,
    direct_theorem_experiment,
    generate_test_function,
    inverse_theorem_experiment,
    rate_sweep,
    slope_fit,
)

__version__ = "0.1.0"

__all__ = [
    "SampleField", "SpectralFunction", "analyze", "in_Y", "l1_degree", "lp_norm", "norm",
    "partial_sum", "project_Y", "random_function", "synthesize",
    "BlockMultiplier", "TapParameters", "apply_block_multiplier", "kernel_convolution",
    "lambda_coeff", "lambda_sequence", "leis_mean", "poisson_mean", "poisson_rho_derivative",
    "radial_derivative", "tap_mean", "taylor_form", "y_poisson_kernel",
    "Modulus", "check_modulus_conditions", "k_functional", "lemma5_sandwich", "m_p",
    "multiplier_norm", "parse_modulus", "remainder_integral", "zbs_check",
    "DecaySpec", "RateReport", "direct_theorem_experiment", "generate_test_function",
    "inverse_theorem_experiment", "rate_sweep", "slope_fit",
]
