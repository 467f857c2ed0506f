"""Gaussian-kernel regularized classification and learning-rate experiments."""

from .approx import (
    BudgetExceededError,
    ConvKernelSpec,
    ConvQuadSpec,
    binomial_order,
    conv_kernel,
    fold,
    kernel_mass,
    rkhs_norm_bound,
    smooth_approximant,
    sup_error,
)
from .harness import (
    ComparisonReport,
    ConfigError,
    ExperimentConfig,
    ExperimentError,
    RateFit,
    TrialRecord,
    check_comparison,
    fit_exponent,
    learning_curve,
    learning_curve_detail,
    theoretical_exponent,
    trial_seed,
)
from .kernel import (
    GaussianKernel,
    SolverDiagnostics,
    TrainedModel,
    cross_gram,
    gauss,
    gram,
    predict,
    rkhs_norm_sq,
)
from .losses import (
    HINGE,
    LOSS_KINDS,
    QUADRATIC,
    TRUNCATED_QUADRATIC,
    Loss,
    UnsupportedLossError,
    clip,
    curvature_constants,
    make_loss,
    sign_plus,
)
from .quadrature import QuadratureError, adaptive_trapezoid, mc_mean, sign_change_roots
from .solver import (
    REGIMES,
    Dataset,
    SolverConfig,
    SolverError,
    objective,
    schedule,
    train,
)
from .synth import (
    FAMILIES,
    Distribution,
    NoiseExponent,
    Smoothness,
    bayes_risk,
    builtin,
    excess_misclass,
    excess_phi_risk,
    sample,
    tsybakov_ratio,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError", "ComparisonReport", "ConfigError", "ConvKernelSpec",
    "ConvQuadSpec", "Dataset", "Distribution", "ExperimentConfig",
    "ExperimentError", "FAMILIES", "GaussianKernel", "HINGE", "LOSS_KINDS",
    "Loss", "NoiseExponent", "QUADRATIC", "QuadratureError", "RateFit",
    "REGIMES", "Smoothness", "SolverConfig", "SolverDiagnostics", "SolverError",
    "TRUNCATED_QUADRATIC", "TrainedModel", "TrialRecord",
    "UnsupportedLossError", "adaptive_trapezoid", "bayes_risk",
    "binomial_order", "builtin", "check_comparison", "clip", "conv_kernel",
    "cross_gram", "curvature_constants", "excess_misclass", "excess_phi_risk",
    "fit_exponent", "fold", "gauss", "gram", "kernel_mass", "learning_curve",
    "learning_curve_detail", "make_loss", "mc_mean", "objective", "predict",
    "rkhs_norm_bound", "rkhs_norm_sq", "sample", "schedule",
    "sign_change_roots", "sign_plus", "smooth_approximant", "sup_error",
    "theoretical_exponent", "train", "trial_seed", "tsybakov_ratio",
]
