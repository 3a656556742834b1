"""Synthetic two-class functional data with a known Bayes error.

Each function is a finite kernel-section combination

    x = sum_a w_a K(u_a, .),   u_a = a / (q + 1),

so it lies in H1 exactly. Coefficients are w = y * delta * w0 + sigma * eps
with w0 the unit alternating pattern (+1, -1, +1, ...) / sqrt(q) and eps
standard normal truncated to [-6, 6]; labels are flipped with probability rho.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtr

from .errors import DegenerateLabels, InvalidParameter
from .kernels import Grid, KernelSpec, kernel_matrix
from .lspline import DiscretizedFunction

MAX_DYADIC_LEVEL = 11
TRUNCATION = 6.0


def dyadic_grid(level: int) -> Grid:
    """{k / 2^level : k = 1..2^level}."""
    if isinstance(level, bool) or not isinstance(level, (int, np.integer)) or not (
        1 <= level <= MAX_DYADIC_LEVEL
    ):
        raise InvalidParameter(f"dyadic level must be an integer in [1, {MAX_DYADIC_LEVEL}], got {level!r}")
    size = 2 ** int(level)
    return Grid(np.arange(1, size + 1) / size)


@dataclass(frozen=True)
class GeneratorSpec:
    spec: KernelSpec = KernelSpec(1)
    anchor_count: int = 7
    class_separation: float = 1.0
    noise_scale: float = 0.0
    flip_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.anchor_count, bool) or self.anchor_count < 1:
            raise InvalidParameter(f"anchor_count must be a positive integer, got {self.anchor_count!r}")
        if not (math.isfinite(self.class_separation) and self.class_separation > 0):
            raise InvalidParameter(f"class_separation must be positive, got {self.class_separation}")
        if not (math.isfinite(self.noise_scale) and self.noise_scale >= 0):
            raise InvalidParameter(f"noise_scale must be nonnegative, got {self.noise_scale}")
        if not (0.0 <= self.flip_prob < 0.5):
            raise InvalidParameter(f"flip_prob must lie in [0, 0.5), got {self.flip_prob}")
        if not (0 <= int(self.seed) < 2 ** 64):
            raise InvalidParameter(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def anchors(self) -> np.ndarray:
        q = self.anchor_count
        return np.arange(1, q + 1) / (q + 1)

    @property
    def pattern(self) -> np.ndarray:
        q = self.anchor_count
        return np.where(np.arange(q) % 2 == 0, 1.0, -1.0) / math.sqrt(q)

    @property
    def anchor_gram(self) -> np.ndarray:
        return kernel_matrix(self.spec, self.anchors, self.anchors)


@dataclass(frozen=True)
class LabeledSample:
    function: DiscretizedFunction
    label: int
    clean_label: int


@dataclass(frozen=True, eq=False)
class FunctionBatch:
    """Coefficients of n generated functions, evaluable on any grid."""

    gs: GeneratorSpec
    coefficients: np.ndarray
    clean_labels: np.ndarray
    labels: np.ndarray

    def values_on(self, grid: Grid) -> np.ndarray:
        return self.coefficients @ kernel_matrix(self.gs.spec, self.gs.anchors, grid.points)

    def samples_on(self, grid: Grid) -> list[LabeledSample]:
        values = self.values_on(grid)
        return [
            LabeledSample(DiscretizedFunction(grid, row), int(lab), int(clean))
            for row, lab, clean in zip(values, self.labels, self.clean_labels)
        ]

    def h1_norms(self) -> np.ndarray:
        g = self.gs.anchor_gram
        return np.sqrt(np.einsum("ij,jk,ik->i", self.coefficients, g, self.coefficients))


def draw_functions(gs: GeneratorSpec, n: int) -> FunctionBatch:
    if n < 1:
        raise InvalidParameter(f"n must be positive, got {n}")
    rng = np.random.default_rng(int(gs.seed))
    clean = np.where(rng.random(n) < 0.5, 1, -1)
    eps = np.clip(rng.standard_normal((n, gs.anchor_count)), -TRUNCATION, TRUNCATION)
    flips = rng.random(n) < gs.flip_prob
    coefs = clean[:, None] * gs.class_separation * gs.pattern[None, :] + gs.noise_scale * eps
    labels = np.where(flips, -clean, clean)
    return FunctionBatch(gs, coefs, clean, labels)


def generate(gs: GeneratorSpec, grid: Grid, n: int) -> list[LabeledSample]:
    """n labelled functions discretized on ``grid``; deterministic in ``gs.seed``."""
    return draw_functions(gs, n).samples_on(grid)


def norm_bound(gs: GeneratorSpec) -> float:
    """Upper bound on the H1 norm of any generated function.

    ||w|| <= delta + 6 sigma sqrt(q) and ||x||^2 = w^T G_q w <= lambda_max(G_q) ||w||^2.
    """
    lam_max = float(np.linalg.eigvalsh(gs.anchor_gram)[-1])
    return (gs.class_separation + TRUNCATION * gs.noise_scale * math.sqrt(gs.anchor_count)) * math.sqrt(lam_max)


def bayes_error(gs: GeneratorSpec) -> float:
    """Err* = rho + (1 - 2 rho) Phi(-delta ||w0|| / sigma).

    The anchor sections are linearly independent, so the function determines w,
    and for isotropic coefficient noise the optimal rule thresholds w0^T w.
    ||w0|| = 1 by construction.
    """
    rho = gs.flip_prob
    if gs.noise_scale == 0.0:
        return rho
    r = float(np.linalg.norm(gs.pattern))
    return rho + (1.0 - 2.0 * rho) * float(ndtr(-gs.class_separation * r / gs.noise_scale))


def bayes_error_monte_carlo(gs: GeneratorSpec, draws: int = 10 ** 6, seed: int = 0, chunk: int = 200_000):
    """Monte-Carlo estimate of Err* and its standard error.

    Classifies each draw with the likelihood ratio of the two noiseless class
    centres, i.e. by nearest centre in coefficient space.
    """
    sub = replace(gs, seed=seed)
    mistakes = 0
    done = 0
    centre = gs.class_separation * gs.pattern
    block = 0
    while done < draws:
        m = min(chunk, draws - done)
        batch = draw_functions(replace(sub, seed=seed + block), m)
        d_plus = np.sum((batch.coefficients - centre) ** 2, axis=1)
        d_minus = np.sum((batch.coefficients + centre) ** 2, axis=1)
        guess = np.where(d_plus <= d_minus, 1, -1)
        mistakes += int(np.sum(guess != batch.labels))
        done += m
        block += 1
    p = mistakes / draws
    return p, math.sqrt(p * (1.0 - p) / draws)


def split(samples: list, train_fraction: float, seed: int = 0) -> tuple[list, list]:
    """Deterministic shuffled train/test split."""
    n = len(samples)
    if n < 2:
        raise InvalidParameter("need at least two samples to split")
    if not (0.0 < train_fraction < 1.0):
        raise InvalidParameter(f"train_fraction must lie in (0, 1), got {train_fraction}")
    labels = {s.label for s in samples}
    if len(labels) < 2:
        raise DegenerateLabels("input to split contains a single class")
    n_train = int(round(train_fraction * n))
    if n_train in (0, n):
        raise InvalidParameter(f"train_fraction {train_fraction} leaves one side of the split empty")
    order = np.random.default_rng(seed).permutation(n)
    return [samples[i] for i in order[:n_train]], [samples[i] for i in order[n_train:]]
