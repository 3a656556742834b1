"""Reproducing kernels for L = D^m and factored Gram matrices.

The space H1 is the subset of the Sobolev space H^m([0, 1]) with
h(0) = h'(0) = ... = h^(m-1)(0) = 0, equipped with <u, v> = int Du^m Dv^m.
Its reproducing kernel is built from the Green's function
G_m(t, u) = (t - u)_+^(m-1) / (m-1)! as

    K(s, t) = int_0^1 G_m(s, u) G_m(t, u) du,

which has the closed forms min(s, t) for m = 1 and a^2 b / 2 - a^3 / 6
(a = min, b = max) for m = 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import lapack, solve_triangular

from .errors import (
    DimensionError,
    DomainError,
    IllConditionedGram,
    InvalidParameter,
    UnsupportedOperator,
)

SUPPORTED_ORDERS = (1, 2)
PIVOT_RTOL = 1e-12
EXACT_CONDITION_MAX_D = 2048
WHITEN_MAX_D = 2048


@dataclass(frozen=True)
class KernelSpec:
    """Order m of the operator L = D^m on [0, 1]."""

    order: int = 1

    def __post_init__(self):
        if isinstance(self.order, bool) or self.order not in SUPPORTED_ORDERS:
            raise UnsupportedOperator(
                f"operator order must be one of {SUPPORTED_ORDERS}, got {self.order!r}"
            )

    def green(self, t, u):
        """Green's function G_m(t, u) = (t - u)_+^(m-1) / (m-1)!."""
        t = np.asarray(t, dtype=float)
        u = np.asarray(u, dtype=float)
        if self.order == 1:
            return (t > u).astype(float)
        diff = np.maximum(t - u, 0.0)
        return diff ** (self.order - 1) / math.factorial(self.order - 1)


class Grid:
    """Strictly increasing discretization points in (0, 1].

    Instances are immutable; ``points`` is a read-only float array.
    """

    __slots__ = ("_points",)

    def __init__(self, points):
        pts = np.array(points, dtype=float).reshape(-1)
        if pts.size < 1:
            raise InvalidParameter("a grid needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise InvalidParameter("grid points must be finite")
        if pts[0] <= 0.0 or pts[-1] > 1.0:
            raise InvalidParameter("grid points must lie in (0, 1]")
        if np.any(np.diff(pts) <= 0.0):
            raise InvalidParameter("grid points must be strictly increasing")
        pts.setflags(write=False)
        self._points = pts

    @property
    def points(self) -> np.ndarray:
        return self._points

    def __len__(self):
        return self._points.size

    def __iter__(self):
        return iter(self._points.tolist())

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return np.array_equal(self._points, other._points)

    def __hash__(self):
        return hash(self._points.tobytes())

    def __repr__(self):
        if len(self) <= 6:
            body = ", ".join(f"{p:g}" for p in self._points)
        else:
            body = f"{self._points[0]:g}, ..., {self._points[-1]:g}; d={len(self)}"
        return f"Grid([{body}])"

    def issubset(self, other: Grid) -> bool:
        return bool(np.all(np.isin(self._points, other._points)))


def green_kernel(spec: KernelSpec, s, t):
    """Reproducing kernel K(s, t) of H1.

    Accepts scalars or broadcastable arrays; scalars in give a float out.
    """
    s_arr = np.asarray(s, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    if np.any((s_arr < 0.0) | (s_arr > 1.0)) or np.any((t_arr < 0.0) | (t_arr > 1.0)):
        raise DomainError("kernel arguments must lie in [0, 1]")
    a = np.minimum(s_arr, t_arr)
    if spec.order == 1:
        out = a
    else:
        b = np.maximum(s_arr, t_arr)
        out = a * a * b / 2.0 - a ** 3 / 6.0
    if out.ndim == 0:
        return float(out)
    return out


def kernel_matrix(spec: KernelSpec, rows, cols) -> np.ndarray:
    """Matrix of K(r_i, c_j) for two point sets."""
    r = np.asarray(rows, dtype=float).reshape(-1, 1)
    c = np.asarray(cols, dtype=float).reshape(1, -1)
    return np.asarray(green_kernel(spec, r, c))


def _cholesky(a: np.ndarray, tol: float):
    """Lower Cholesky factor of ``a`` or the (index, pivot) where it breaks down."""
    factor, info = lapack.dpotrf(a, lower=1, clean=1)
    if info < 0:
        raise ValueError(f"dpotrf: illegal argument {-info}")
    if info > 0:
        return None, (info - 1, float("nan"))
    pivots = np.diag(factor) ** 2
    bad = np.flatnonzero(pivots <= tol)
    if bad.size:
        k = int(bad[0])
        return None, (k, float(pivots[k]))
    return factor, None


def _suggest_jitter(matrix: np.ndarray, tol: float):
    eye = np.eye(matrix.shape[0])
    for exponent in range(-15, -1):
        lam = 10.0 ** exponent
        factor, _ = _cholesky(matrix + lam * eye, tol)
        if factor is not None:
            return lam
    return None


@dataclass(frozen=True, eq=False)
class GramFactor:
    """K_d on a grid together with the Cholesky factor of K_d + jitter * I."""

    spec: KernelSpec
    grid: Grid
    matrix: np.ndarray
    jitter: float
    factor: np.ndarray
    condition_estimate: float
    pivot_tolerance: float = field(default=0.0)

    @property
    def d(self) -> int:
        return len(self.grid)

    @property
    def shifted(self) -> np.ndarray:
        return self.matrix + self.jitter * np.eye(self.d)

    def check_vector(self, u, name="vector") -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape[-1:] != (self.d,):
            raise DimensionError(f"{name} has trailing length {u.shape[-1:]}, expected {self.d}")
        return u

    def solve_lower(self, u) -> np.ndarray:
        """L^{-1} u for the Cholesky factor L; ``u`` may be (d,) or (n, d)."""
        u = self.check_vector(u)
        return solve_triangular(self.factor, u.T, lower=True, check_finite=False).T

    def solve(self, u) -> np.ndarray:
        """(K_d + jitter * I)^{-1} u."""
        z = self.solve_lower(u)
        return solve_triangular(self.factor, z.T, lower=True, trans="T", check_finite=False).T

    @cached_property
    def _eigh(self):
        if self.d > WHITEN_MAX_D:
            raise InvalidParameter(f"eigen path is limited to d <= {WHITEN_MAX_D}")
        return np.linalg.eigh(self.shifted)

    @cached_property
    def inverse_sqrt(self) -> np.ndarray:
        """Symmetric (K_d + jitter * I)^{-1/2} from the eigendecomposition."""
        vals, vecs = self._eigh
        return (vecs / np.sqrt(vals)) @ vecs.T


def gram_matrix(spec: KernelSpec, grid: Grid, jitter: float = 0.0) -> GramFactor:
    """Assemble and factor K_d + jitter * I.

    Raises
    ------
    IllConditionedGram
        If a Cholesky pivot falls to or below ``1e-12 * max(diag(K_d))``.
    """
    jitter = float(jitter)
    if not (jitter >= 0.0 and math.isfinite(jitter)):
        raise InvalidParameter(f"jitter must be a finite nonnegative number, got {jitter}")
    pts = grid.points
    matrix = kernel_matrix(spec, pts, pts)
    matrix.setflags(write=False)
    tol = PIVOT_RTOL * float(np.max(np.diag(matrix)))
    shifted = matrix + jitter * np.eye(len(grid))
    factor, failure = _cholesky(shifted, tol)
    if factor is None:
        index, pivot = failure
        raise IllConditionedGram(index, pivot, _suggest_jitter(matrix, tol))
    if len(grid) <= EXACT_CONDITION_MAX_D:
        eig = np.linalg.eigvalsh(shifted)
        cond = float(eig[-1] / eig[0])
    else:
        diag = np.diag(factor)
        cond = float((diag.max() / diag.min()) ** 2)
    factor.setflags(write=False)
    return GramFactor(spec, grid, matrix, jitter, factor, cond, tol)


def quad_form_inverse(gf: GramFactor, u, v) -> float:
    """u^T (K_d + jitter * I)^{-1} v via two triangular solves."""
    u = gf.check_vector(u, "u")
    v = gf.check_vector(v, "v")
    if u.ndim != 1 or v.ndim != 1:
        raise DimensionError("quad_form_inverse expects 1-D vectors")
    zu = gf.solve_lower(u)
    if v is u or np.array_equal(u, v):
        return float(zu @ zu)
    return float(zu @ gf.solve_lower(v))


def whiten(gf: GramFactor, u) -> np.ndarray:
    """(K_d + jitter * I)^{-1/2} u through the symmetric eigendecomposition.

    Only meant as an independent cross-check of the Cholesky route.
    """
    u = gf.check_vector(u, "u")
    return u @ gf.inverse_sqrt
