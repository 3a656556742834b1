"""Functional SVMs on L-spline derivatives of discretized curves."""

from .datagen import GeneratorSpec, LabeledSample, bayes_error, dyadic_grid, generate, split
from .errors import (
    AmbiguousAtKnot,
    ConfigError,
    ConvergenceFailure,
    DegenerateLabels,
    DimensionError,
    DomainError,
    GridMismatch,
    GridNestingError,
    IllConditionedGram,
    InvalidKernelMatrix,
    InvalidParameter,
    SplineSvmError,
    UnsupportedOperator,
)
from .functional import (
    FunctionalSvmConfig,
    FunctionalSvmModel,
    c_schedule,
    derivative_gauss_kernel,
    fit,
    predict,
    spline_gauss_kernel,
)
from .kernels import Grid, GramFactor, KernelSpec, gram_matrix, green_kernel, quad_form_inverse, whiten
from .lspline import (
    DiscretizedFunction,
    LSpline,
    evaluate,
    inner_product,
    interpolate,
    l_derivative,
    norm_sq,
    projection_residual_sq,
    smooth,
)
from .svm import SvmModel, SvmParams, decision_function, kkt_report, solve_dual

__all__ = [
    "AmbiguousAtKnot",
    "bayes_error",
    "c_schedule",
    "ConfigError",
    "ConvergenceFailure",
    "decision_function",
    "DegenerateLabels",
    "derivative_gauss_kernel",
    "DimensionError",
    "DiscretizedFunction",
    "DomainError",
    "dyadic_grid",
    "evaluate",
    "fit",
    "FunctionalSvmConfig",
    "FunctionalSvmModel",
    "generate",
    "GeneratorSpec",
    "gram_matrix",
    "GramFactor",
    "green_kernel",
    "Grid",
    "GridMismatch",
    "GridNestingError",
    "IllConditionedGram",
    "inner_product",
    "interpolate",
    "InvalidKernelMatrix",
    "InvalidParameter",
    "KernelSpec",
    "kkt_report",
    "l_derivative",
    "LabeledSample",
    "LSpline",
    "norm_sq",
    "predict",
    "projection_residual_sq",
    "quad_form_inverse",
    "smooth",
    "solve_dual",
    "spline_gauss_kernel",
    "SplineSvmError",
    "split",
    "SvmModel",
    "SvmParams",
    "UnsupportedOperator",
    "whiten",
]

__version__ = "0.1.0"
