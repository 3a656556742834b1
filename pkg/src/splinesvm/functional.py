"""SVM on the L-derivatives of interpolating splines, run on discretizations.

The Gaussian kernel between derivatives of two interpolants,
exp(-gamma ||Lh1 - Lh2||^2_{L2}), equals exp(-gamma (x1-x2)^T K_d^{-1} (x1-x2))
on their discretizations. The kernel matrix is therefore assembled from
Cholesky-whitened vectors L^{-1} x; K_d^{-1/2} is never formed on this path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DimensionError, GridMismatch, InvalidParameter
from .kernels import Grid, GramFactor, KernelSpec, gram_matrix, quad_form_inverse
from .lspline import DiscretizedFunction, LSpline, inner_product, norm_sq
from .svm import DualSolution, SvmModel, SvmParams, classify, solve_dual


def _check_beta(beta, d):
    if beta is None:
        return
    if isinstance(beta, bool) or not isinstance(beta, (int, float)) or not (0.0 < beta < 1.0 / d):
        raise InvalidParameter(f"beta must lie in (0, 1/d) = (0, {1.0 / d:g}), got {beta!r}")


def c_schedule(n: int, d: int, beta: float | None = None) -> float:
    """Box bound C = n^(1 - beta); beta defaults to 1 / (2d)."""
    if n < 1 or d < 1:
        raise InvalidParameter(f"n and d must be positive, got n={n}, d={d}")
    _check_beta(beta, d)
    if beta is None:
        beta = 1.0 / (2.0 * d)
    return float(n) ** (1.0 - beta)


@dataclass(frozen=True)
class FunctionalSvmConfig:
    spec: KernelSpec
    grid: Grid
    gamma: float = 1.0
    jitter: float = 0.0
    beta: float | None = None
    c_override: float | None = None
    kkt_tolerance: float = 1e-6
    max_passes: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise InvalidParameter(f"gamma must be positive, got {self.gamma}")
        if not (math.isfinite(self.jitter) and self.jitter >= 0):
            raise InvalidParameter(f"jitter must be nonnegative, got {self.jitter}")
        _check_beta(self.beta, len(self.grid))
        if self.c_override is not None and not (
            math.isfinite(self.c_override) and self.c_override > 0
        ):
            raise InvalidParameter(f"c_override must be positive, got {self.c_override}")

    def c_for(self, n: int) -> float:
        if self.c_override is not None:
            return float(self.c_override)
        return c_schedule(n, len(self.grid), self.beta)


@dataclass(frozen=True, eq=False)
class FunctionalSvmModel:
    config: FunctionalSvmConfig
    gram: GramFactor
    core: SvmModel
    _whitened_sv: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.gram.grid != self.config.grid:
            raise GridMismatch("Gram factor grid differs from the configured grid")
        if self._whitened_sv is None:
            object.__setattr__(self, "_whitened_sv", self.gram.solve_lower(self.core.support_vectors))

    @property
    def c_used(self) -> float:
        return self.core.params.c_bound

    def decision_scores(self, values) -> np.ndarray:
        """Decision values for an (n, d) array of discretizations."""
        x = np.atleast_2d(np.asarray(values, dtype=float))
        rows = np.exp(-self.config.gamma * cdist(self.gram.solve_lower(x), self._whitened_sv, "sqeuclidean"))
        # elementwise sum rather than BLAS: mirrored terms cancel exactly and
        # results do not depend on the BLAS build
        return (rows * self.core.dual_coefs).sum(axis=1) + self.core.bias


def spline_gauss_kernel(gf: GramFactor, gamma: float, x1, x2) -> float:
    """exp(-gamma (x1 - x2)^T (K_d + jitter I)^{-1} (x1 - x2))."""
    if not gamma > 0:
        raise InvalidParameter(f"gamma must be positive, got {gamma}")
    diff = gf.check_vector(x1, "x1") - gf.check_vector(x2, "x2")
    return math.exp(-gamma * quad_form_inverse(gf, diff, diff))


def derivative_gauss_kernel(s1: LSpline, s2: LSpline, gf: GramFactor, gamma: float) -> float:
    """exp(-gamma ||Lh1 - Lh2||^2) with the distance expanded in H1 inner products."""
    if not gamma > 0:
        raise InvalidParameter(f"gamma must be positive, got {gamma}")
    dist_sq = norm_sq(s1, gf) - 2.0 * inner_product(s1, s2, gf) + norm_sq(s2, gf)
    return math.exp(-gamma * max(dist_sq, 0.0))


def gauss_kernel_matrix(gf: GramFactor, gamma: float, x1, x2=None) -> np.ndarray:
    """Kernel matrix between rows of ``x1`` and ``x2`` (``x1`` itself when omitted)."""
    z1 = gf.solve_lower(np.atleast_2d(np.asarray(x1, dtype=float)))
    z2 = z1 if x2 is None else gf.solve_lower(np.atleast_2d(np.asarray(x2, dtype=float)))
    return np.exp(-gamma * cdist(z1, z2, "sqeuclidean"))


def stack_samples(samples, grid: Grid) -> np.ndarray:
    """(n, d) array from DiscretizedFunction objects or a plain array."""
    if isinstance(samples, np.ndarray):
        x = np.atleast_2d(samples.astype(float))
        if x.shape[1] != len(grid):
            raise GridMismatch(f"samples have {x.shape[1]} columns, grid has {len(grid)} points")
        return x
    rows = []
    for k, sample in enumerate(samples):
        if sample.grid != grid:
            raise GridMismatch(f"sample {k} is discretized on a different grid")
        rows.append(sample.values)
    if not rows:
        raise DimensionError("no samples given")
    return np.vstack(rows)


def kernel_id(config: FunctionalSvmConfig) -> str:
    return (
        f"spline_gauss(order={config.spec.order}, d={len(config.grid)}, "
        f"gamma={config.gamma!r}, jitter={config.jitter!r})"
    )


def fit(samples: Sequence[DiscretizedFunction] | np.ndarray, labels, config: FunctionalSvmConfig) -> FunctionalSvmModel:
    """Train on discretized functions with C from the schedule unless overridden.

    Raises whatever the Gram factorization or the dual solver raise
    (IllConditionedGram, DegenerateLabels, ConvergenceFailure) and
    GridMismatch for samples on a foreign grid.
    """
    x = stack_samples(samples, config.grid)
    y = np.asarray(labels, dtype=float).reshape(-1)
    if y.size != x.shape[0]:
        raise DimensionError(f"{y.size} labels for {x.shape[0]} samples")
    gram = gram_matrix(config.spec, config.grid, config.jitter)
    k = gauss_kernel_matrix(gram, config.gamma, x)
    params = SvmParams(
        c_bound=config.c_for(x.shape[0]),
        gamma=config.gamma,
        kkt_tolerance=config.kkt_tolerance,
        max_passes=config.max_passes,
    )
    solution: DualSolution = solve_dual(k, y, params)
    core = SvmModel.from_solution(x, y, solution, params, kernel_id(config))
    return FunctionalSvmModel(config, gram, core)


def predict(model: FunctionalSvmModel, sample: DiscretizedFunction) -> tuple[int, float]:
    """Label (sign with ties to +1) and decision value for one sample."""
    if sample.grid != model.config.grid:
        raise GridMismatch("sample grid differs from the model grid")
    score = float(model.decision_scores(sample.values)[0])
    return classify(score), score


def predict_many(model: FunctionalSvmModel, samples) -> tuple[np.ndarray, np.ndarray]:
    x = stack_samples(samples, model.config.grid)
    scores = model.decision_scores(x)
    return classify(scores), scores
