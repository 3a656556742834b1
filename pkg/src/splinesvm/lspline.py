"""Minimal-norm L-spline interpolation of discretized functions.

A function known at t_1 < ... < t_d is represented by the unique element of
H1 with minimal norm that matches those values,

    h = sum_i c_i K(t_i, .),   c = K_d^{-1} x,

and inner products between such interpolants reduce to x1^T K_d^{-1} x2.
Smoothing splines replace K_d by K_d + lam * I.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AmbiguousAtKnot,
    DimensionError,
    DomainError,
    GridNestingError,
    InvalidParameter,
)
from .kernels import Grid, GramFactor, KernelSpec, gram_matrix, kernel_matrix, quad_form_inverse

# two-point Gauss-Legendre on [0, 1]; exact for the piecewise quadratics (Lh1 * Lh2) met here
_GL_NODES = np.array([0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0)])
_GL_WEIGHTS = np.array([0.5, 0.5])


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DiscretizedFunction:
    """Values x(t_1), ..., x(t_d) of a function on a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values).reshape(-1)
        if values.size != len(self.grid):
            raise DimensionError(
                f"{values.size} values given for a grid of {len(self.grid)} points"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidParameter("function values must be finite")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True, eq=False)
class LSpline:
    """h = sum_i c_i K(t_i, .) fitted to ``source_values`` on ``grid``."""

    spec: KernelSpec
    grid: Grid
    coefficients: np.ndarray
    source_values: np.ndarray
    jitter: float = 0.0

    def __call__(self, t):
        return evaluate(self, t)


def _check_factor(gf: GramFactor, grid: Grid, spec: KernelSpec):
    if gf.grid != grid or gf.spec != spec:
        raise DimensionError("Gram factor was built on a different grid or operator")


def interpolate(df: DiscretizedFunction, spec: KernelSpec, gf: GramFactor | None = None) -> LSpline:
    """Minimal-norm interpolant of ``df`` in H1.

    ``gf`` is assembled on the fly when omitted; when given it must have been
    built on ``df.grid`` with ``spec`` and zero jitter.
    """
    if gf is None:
        gf = gram_matrix(spec, df.grid)
    _check_factor(gf, df.grid, spec)
    if gf.jitter != 0.0:
        raise InvalidParameter("interpolation needs an unjittered Gram factor; use smooth()")
    return LSpline(spec, df.grid, _frozen(gf.solve(df.values)), df.values, 0.0)


def smooth(df: DiscretizedFunction, spec: KernelSpec, lam: float) -> LSpline:
    """Smoothing spline with coefficients solving (K_d + lam * I) c = x."""
    lam = float(lam)
    if not (lam > 0.0 and math.isfinite(lam)):
        raise InvalidParameter(f"smoothing parameter must be positive, got {lam}")
    gf = gram_matrix(spec, df.grid, lam)
    return LSpline(spec, df.grid, _frozen(gf.solve(df.values)), df.values, lam)


def _check_domain(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any((t < 0.0) | (t > 1.0)):
        raise DomainError("spline evaluation points must lie in [0, 1]")
    return t


def evaluate(s: LSpline, t):
    """h(t) for a scalar or array of points in [0, 1]."""
    t = _check_domain(t)
    out = kernel_matrix(s.spec, t, s.grid.points) @ s.coefficients
    return float(out[0]) if t.ndim == 0 else out.reshape(t.shape)


def _l_derivative_unchecked(s: LSpline, t: np.ndarray) -> np.ndarray:
    # L K(t_i, .)(t) is the Green's function G_m(t_i, t)
    basis = s.spec.green(s.grid.points[None, :], t.reshape(-1, 1))
    return basis @ s.coefficients


def l_derivative(s: LSpline, t):
    """(Lh)(t) = sum_i c_i G_m(t_i, t).

    Piecewise constant for m = 1, with jumps at the knots; asking for the
    value exactly at a knot then raises :class:`AmbiguousAtKnot`.
    """
    t = _check_domain(t)
    if s.spec.order == 1 and np.any(np.isin(t, s.grid.points)):
        raise AmbiguousAtKnot("the first derivative of an m=1 spline jumps at its knots")
    out = _l_derivative_unchecked(s, t)
    return float(out[0]) if t.ndim == 0 else out.reshape(t.shape)


def derivative_inner_l2(s1: LSpline, s2: LSpline) -> float:
    """int_0^1 Lh1(t) Lh2(t) dt, integrated exactly piece by piece.

    Both Lh are polynomials of degree m - 1 between consecutive knots, so a
    two-point Gauss rule per piece is exact; it also never samples a knot.
    """
    if s1.spec != s2.spec:
        raise DimensionError("splines use different operators")
    breaks = np.union1d(np.union1d(s1.grid.points, s2.grid.points), [0.0, 1.0])
    left, width = breaks[:-1], np.diff(breaks)
    nodes = (left[:, None] + width[:, None] * _GL_NODES[None, :]).ravel()
    weights = (width[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return float(np.sum(weights * _l_derivative_unchecked(s1, nodes) * _l_derivative_unchecked(s2, nodes)))


def _check_spline_factor(s: LSpline, gf: GramFactor):
    _check_factor(gf, s.grid, s.spec)
    if gf.jitter != s.jitter:
        raise DimensionError(
            f"Gram factor jitter {gf.jitter} differs from the spline's {s.jitter}"
        )


def inner_product(s1: LSpline, s2: LSpline, gf: GramFactor) -> float:
    """<h1, h2> in H1, i.e. x1^T K_d^{-1} x2 for interpolants.

    For smoothing splines c1^T K_d c2 is recovered as
    x1^T (K_d + lam I)^{-1} x2 - lam * c1^T c2.
    """
    _check_spline_factor(s1, gf)
    _check_spline_factor(s2, gf)
    value = quad_form_inverse(gf, s1.source_values, s2.source_values)
    if gf.jitter:
        value -= gf.jitter * float(s1.coefficients @ s2.coefficients)
    return value


def norm_sq(s: LSpline, gf: GramFactor) -> float:
    """Squared H1 norm of the spline, int (Lh)^2."""
    return inner_product(s, s, gf)


def projection_residual_sq(fine: LSpline, coarse_grid: Grid, gf_coarse: GramFactor) -> float:
    """||x - P x||^2 where P projects onto span{K(t, .), t in coarse_grid}.

    The projection is the interpolant of ``fine`` at the coarse knots, and the
    residual follows from Pythagoras: ||x||^2 - ||P x||^2.
    """
    if not coarse_grid.issubset(fine.grid):
        raise GridNestingError("coarse grid is not contained in the spline's grid")
    coarse_values = evaluate(fine, coarse_grid.points)
    projected = interpolate(DiscretizedFunction(coarse_grid, coarse_values), fine.spec, gf_coarse)
    k_fine = kernel_matrix(fine.spec, fine.grid.points, fine.grid.points)
    fine_norm = float(fine.coefficients @ k_fine @ fine.coefficients)
    return fine_norm - norm_sq(projected, gf_coarse)
