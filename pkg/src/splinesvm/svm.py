"""Soft-margin SVM dual solved by sequential minimal optimization.

Solves

    max_a  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j k(x_i, x_j)
    s.t.   sum_i a_i y_i = 0,  0 <= a_i <= C

on a precomputed kernel matrix. Working pairs are the maximal violating pair
(Keerthi et al.), which pairs the worst KKT violator with the index that
maximizes the prediction-error gap; ties go to the lowest index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from numba import njit

from .errors import (
    ConvergenceFailure,
    DegenerateLabels,
    DimensionError,
    InvalidKernelMatrix,
    InvalidParameter,
)

SYMMETRY_ATOL = 1e-10
# curvature floor for pairs of identical points (LIBSVM uses the same value)
TAU = 1e-12


@dataclass(frozen=True)
class SvmParams:
    """Box bound, Gaussian width and stopping rule.

    ``max_passes`` counts sweeps of n pair updates; ``None`` allows 10 * n
    sweeps, i.e. 10 * n**2 updates in total.
    """

    c_bound: float
    gamma: float = 1.0
    kkt_tolerance: float = 1e-6
    max_passes: int | None = None

    def __post_init__(self):
        for name in ("c_bound", "gamma", "kkt_tolerance"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise InvalidParameter(f"{name} must be a positive number, got {value!r}")
        if self.max_passes is not None and self.max_passes < 1:
            raise InvalidParameter(f"max_passes must be positive, got {self.max_passes}")


class DualSolution(NamedTuple):
    alphas: np.ndarray
    bias: float
    dual_objective: float


@dataclass(frozen=True, eq=False)
class SvmModel:
    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    params: SvmParams
    kernel_id: str = "precomputed"

    @classmethod
    def from_solution(cls, features, labels, solution: DualSolution, params, kernel_id="precomputed"):
        """Keep the samples with nonzero multipliers."""
        features = np.asarray(features, dtype=float)
        keep = solution.alphas > 0.0
        sv = features[keep].copy()
        coefs = (solution.alphas * np.asarray(labels, dtype=float))[keep]
        sv.setflags(write=False)
        coefs.setflags(write=False)
        return cls(sv, coefs, float(solution.bias), params, kernel_id)

    @property
    def n_support(self) -> int:
        return int(self.dual_coefs.size)


def _validate(kernel_matrix, labels):
    k = np.asarray(kernel_matrix, dtype=float)
    y = np.asarray(labels, dtype=float).reshape(-1)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise InvalidKernelMatrix(f"kernel matrix must be square, got shape {k.shape}")
    if k.shape[0] != y.size:
        raise DimensionError(f"{y.size} labels for a {k.shape[0]}x{k.shape[0]} kernel matrix")
    if not np.all(np.isfinite(k)):
        raise InvalidKernelMatrix("kernel matrix has non-finite entries")
    if np.max(np.abs(k - k.T), initial=0.0) > SYMMETRY_ATOL:
        raise InvalidKernelMatrix("kernel matrix is not symmetric")
    if not np.all(np.abs(y) == 1.0):
        raise InvalidParameter("labels must be +1 or -1")
    if np.all(y > 0) or np.all(y < 0):
        raise DegenerateLabels("training labels contain a single class")
    return k, y


def dual_objective(kernel_matrix, labels, alphas) -> float:
    """sum(a) - 1/2 (a*y)^T K (a*y)."""
    k = np.asarray(kernel_matrix, dtype=float)
    ay = np.asarray(alphas, dtype=float) * np.asarray(labels, dtype=float)
    return float(np.sum(alphas) - 0.5 * ay @ k @ ay)


def _index_sets(alphas, y, c):
    up = ((y > 0) & (alphas < c)) | ((y < 0) & (alphas > 0))
    low = ((y < 0) & (alphas < c)) | ((y > 0) & (alphas > 0))
    return up, low


def _bias(alphas, y, g, c):
    free = (alphas > 0) & (alphas < c)
    if np.any(free):
        return float(np.mean(g[free]))
    up, low = _index_sets(alphas, y, c)
    hi = np.max(g[up]) if np.any(up) else -np.inf
    lo = np.min(g[low]) if np.any(low) else np.inf
    if math.isinf(hi) and math.isinf(lo):
        return 0.0
    if math.isinf(hi):
        return float(lo)
    if math.isinf(lo):
        return float(hi)
    return 0.5 * float(hi + lo)


def kkt_report(kernel_matrix, labels, alphas, bias, params: SvmParams) -> float:
    """Largest KKT violation over the training samples.

    With margins y_i f(x_i): samples at a_i = 0 must have margin >= 1,
    samples at a_i = C margin <= 1, and free samples margin exactly 1.
    """
    k = np.asarray(kernel_matrix, dtype=float)
    y = np.asarray(labels, dtype=float).reshape(-1)
    a = np.asarray(alphas, dtype=float).reshape(-1)
    if k.shape != (y.size, y.size) or a.size != y.size:
        raise DimensionError("kernel matrix, labels and alphas disagree in size")
    c = params.c_bound
    margin = y * (k @ (a * y) + bias)
    at_lower = a <= 1e-12 * c
    at_upper = a >= c * (1.0 - 1e-12)
    violation = np.where(
        at_lower,
        np.maximum(0.0, 1.0 - margin),
        np.where(at_upper, np.maximum(0.0, margin - 1.0), np.abs(margin - 1.0)),
    )
    return float(np.max(violation, initial=0.0))


@njit(cache=True)
def _smo_steps(k, y, alphas, grad, c, tol, max_steps):  # pragma: no cover - compiled
    """Run up to ``max_steps`` maximal-violating-pair updates in place.

    Returns the number of updates made and whether the pair gap fell to ``tol``.
    """
    n = y.size
    for step_no in range(max_steps):
        i = -1
        j = -1
        g_max = -np.inf
        g_min = np.inf
        for t in range(n):
            g = -y[t] * grad[t]
            if (y[t] > 0 and alphas[t] < c) or (y[t] < 0 and alphas[t] > 0):
                if g > g_max:
                    g_max = g
                    i = t
            if (y[t] < 0 and alphas[t] < c) or (y[t] > 0 and alphas[t] > 0):
                if g < g_min:
                    g_min = g
                    j = t
        if i < 0 or j < 0 or g_max - g_min <= tol:
            return step_no, True
        gap = g_max - g_min
        eta = k[i, i] + k[j, j] - 2.0 * k[i, j]
        if eta <= 0.0:
            eta = TAU
        step_i = c - alphas[i] if y[i] > 0 else alphas[i]
        step_j = alphas[j] if y[j] > 0 else c - alphas[j]
        step = min(gap / eta, step_i, step_j)
        if step == step_i:
            alphas[i] = c if y[i] > 0 else 0.0
        else:
            alphas[i] += y[i] * step
        if step == step_j:
            alphas[j] = 0.0 if y[j] > 0 else c
        else:
            alphas[j] -= y[j] * step
        # k is symmetric, so walk rows i and j contiguously
        for t in range(n):
            grad[t] += step * y[t] * (k[i, t] - k[j, t])
    return max_steps, False


def solve_dual(
    kernel_matrix,
    labels,
    params: SvmParams,
    callback: Callable[[np.ndarray], None] | None = None,
) -> DualSolution:
    """Run SMO to a KKT tolerance of ``params.kkt_tolerance``.

    ``callback`` receives a read-only view of the multipliers after every
    pair update.

    Raises
    ------
    DegenerateLabels
        If only one class is present.
    InvalidKernelMatrix
        If the matrix is not square and symmetric.
    ConvergenceFailure
        If the update budget is exhausted first.
    """
    k, y = _validate(kernel_matrix, labels)
    k = np.ascontiguousarray(k)
    n = y.size
    c = float(params.c_bound)
    tol = float(params.kkt_tolerance)
    passes = params.max_passes if params.max_passes is not None else 10 * n
    budget = passes * n
    chunk = 1 if callback is not None else budget

    alphas = np.zeros(n)
    # gradient of the minimization form 1/2 a^T Q a - sum(a)
    grad = -np.ones(n)
    iterations = 0
    while True:
        done, converged = _smo_steps(k, y, alphas, grad, c, tol, min(chunk, budget - iterations))
        iterations += done
        if callback is not None and done:
            view = alphas.view()
            view.setflags(write=False)
            callback(view)
        if converged:
            # refresh the gradient to shed drift before declaring convergence
            grad = y * (k @ (alphas * y)) - 1.0
            bias = _bias(alphas, y, -y * grad, c)
            if kkt_report(k, y, alphas, bias, params) <= tol:
                return DualSolution(alphas, bias, dual_objective(k, y, alphas))
            # drift hid a violation; take one forced step past the tolerance check
            done, _ = _smo_steps(k, y, alphas, grad, c, 0.0, 1)
            iterations += done
            if not done:
                return DualSolution(alphas, bias, dual_objective(k, y, alphas))
        if iterations >= budget:
            bias = _bias(alphas, y, -y * grad, c)
            raise ConvergenceFailure(kkt_report(k, y, alphas, bias, params), iterations)


def decision_function(model: SvmModel, kernel_row) -> float:
    """f(x) = sum_i a_i y_i k(s_i, x) + b."""
    row = np.asarray(kernel_row, dtype=float).reshape(-1)
    if row.size != model.dual_coefs.size:
        raise DimensionError(
            f"kernel row has {row.size} entries for {model.dual_coefs.size} support vectors"
        )
    return float(row @ model.dual_coefs + model.bias)


def classify(score) -> np.ndarray | int:
    """Sign with ties resolved to +1."""
    labels = np.where(np.asarray(score) >= 0.0, 1, -1)
    return int(labels) if labels.ndim == 0 else labels
