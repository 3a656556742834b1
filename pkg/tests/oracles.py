"""Independent reference computations used only by the tests."""

import itertools
import math

import numpy as np


def simpson(f, a, b, panels=10_000):
    """Composite Simpson rule with an even number of panels."""
    if panels % 2:
        panels += 1
    if b <= a:
        return 0.0
    x = np.linspace(a, b, panels + 1)
    fx = f(x)
    h = (b - a) / panels
    return h / 3.0 * (fx[0] + fx[-1] + 4.0 * fx[1:-1:2].sum() + 2.0 * fx[2:-1:2].sum())


def green(order, t, u):
    """(t - u)_+^(m-1) / (m-1)!, written out independently of the package."""
    if order == 1:
        # closed at u = t; a single point does not change the integral
        return np.where(t >= u, 1.0, 0.0)
    return np.where(t > u, t - u, 0.0)


def kernel_by_quadrature(order, s, t, panels=10_000):
    # the integrand vanishes beyond min(s, t) and is a polynomial before it
    upper = min(s, t)
    return simpson(lambda u: green(order, s, u) * green(order, t, u), 0.0, upper, panels)


def gauss_solve(a, b):
    """Gaussian elimination with partial pivoting in plain Python."""
    n = len(b)
    m = [list(map(float, row)) + [float(rhs)] for row, rhs in zip(a, b)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(m[r][col]))
        m[col], m[piv] = m[piv], m[col]
        for r in range(col + 1, n):
            factor = m[r][col] / m[col][col]
            for k in range(col, n + 1):
                m[r][k] -= factor * m[col][k]
    x = [0.0] * n
    for r in range(n - 1, -1, -1):
        x[r] = (m[r][n] - sum(m[r][k] * x[k] for k in range(r + 1, n))) / m[r][r]
    return x


def min_kernel(s, t):
    return min(s, t)


def cubic_kernel(s, t):
    a, b = min(s, t), max(s, t)
    return a * a * b / 2 - a ** 3 / 6


def dense_kernel(order, pts_a, pts_b):
    fn = min_kernel if order == 1 else cubic_kernel
    return np.array([[fn(s, t) for t in pts_b] for s in pts_a])


def brute_force_dual(k, y, c):
    """Exact maximum of the soft-margin dual by active-set enumeration.

    Every index is assigned to {at 0, at C, free}; for each assignment the
    free multipliers solve the equality-constrained stationarity system.
    Feasible candidates are compared on the objective. Needs Q positive
    definite on every free subset (distinct points, Gaussian kernel).
    """
    k = np.asarray(k, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.size
    q = np.outer(y, y) * k
    best, best_alpha = -np.inf, None
    for states in itertools.product((0, 1, 2), repeat=n):
        states = np.array(states)
        free = np.flatnonzero(states == 2)
        alpha = np.where(states == 1, c, 0.0)
        if free.size:
            fixed = np.flatnonzero(states != 2)
            nf = free.size
            sys_m = np.zeros((nf + 1, nf + 1))
            sys_m[:nf, :nf] = q[np.ix_(free, free)]
            sys_m[:nf, nf] = y[free]
            sys_m[nf, :nf] = y[free]
            rhs = np.zeros(nf + 1)
            rhs[:nf] = 1.0 - q[np.ix_(free, fixed)] @ alpha[fixed]
            rhs[nf] = -y[fixed] @ alpha[fixed]
            try:
                sol = np.linalg.solve(sys_m, rhs)
            except np.linalg.LinAlgError:
                continue
            alpha[free] = sol[:nf]
            if np.any(alpha[free] < -1e-12) or np.any(alpha[free] > c + 1e-12):
                continue
        if abs(y @ alpha) > 1e-9 * max(1.0, c):
            continue
        value = alpha.sum() - 0.5 * alpha @ q @ alpha
        if value > best:
            best, best_alpha = value, alpha.copy()
    return best, best_alpha


def random_grid(rng, d, low_gap=0.5):
    """Jittered equispaced grid: t_k = (k - u_k * low_gap) / d."""
    k = np.arange(1, d + 1)
    return (k - low_gap * rng.random(d)) / d


def random_h1_function(rng, order, max_terms=6):
    """A random finite kernel-section combination, returned as a callable."""
    q = int(rng.integers(1, max_terms + 1))
    anchors = rng.uniform(0.05, 1.0, size=q)
    weights = rng.normal(size=q)

    def x(t):
        t = np.asarray(t, dtype=float)
        return dense_kernel(order, np.atleast_1d(t), anchors) @ weights

    return x


def piecewise_derivative_sq_m1(grid, c):
    """int_0^1 (sum_i c_i 1{t < t_i})^2 dt for a first-order spline."""
    grid = np.asarray(grid, dtype=float)
    c = np.asarray(c, dtype=float)
    total = 0.0
    left = 0.0
    for k, right in enumerate(grid):
        level = c[k:].sum()
        total += (right - left) * level * level
        left = right
    return total


def normal_cdf(x):
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def l_derivative_explicit(order, grid, c, t):
    """Lh(t) = sum_i c_i 1{t < t_i} (order 1) or sum_i c_i (t_i - t)_+ (order 2)."""
    grid = np.asarray(grid, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    gap = grid[None, :] - t[:, None]
    basis = (gap > 0).astype(float) if order == 1 else np.maximum(gap, 0.0)
    return basis @ np.asarray(c, dtype=float)


def piecewise_l_product(order, grid, c1, c2):
    """int_0^1 Lh1 Lh2 by Simpson's rule on each knot interval.

    Both factors are constant (order 1) or linear (order 2) between knots,
    so the product is at most quadratic there and Simpson is exact.
    """
    edges = np.concatenate([[0.0], np.asarray(grid, dtype=float)])
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        # evaluate just inside the interval so order-1 jumps at knots do not leak in
        pts = np.array([a, 0.5 * (a + b), b])
        inside = np.clip(pts, a + 1e-14 * (b - a), b - 1e-14 * (b - a))
        f = l_derivative_explicit(order, grid, c1, inside) * l_derivative_explicit(order, grid, c2, inside)
        total += (b - a) / 6.0 * (f[0] + 4.0 * f[1] + f[2])
    # beyond the last knot every term vanishes
    return total
