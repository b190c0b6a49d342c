"""Shared numerical helpers: bracketed bisection, one-sided finite differences,
extended binomial coefficients."""

from __future__ import annotations

import functools
import math

import numpy as np

MACHINE_EPS = np.finfo(float).eps


def binom_ext(alpha: float, k: int) -> float:
    """Extended binomial coefficient binom(alpha, k) for real alpha.

    Computed as the direct product prod_{j=0}^{k-1}(alpha - j) / k!, which is
    exact for the small k needed here and avoids log-gamma sign bookkeeping.
    """
    out = 1.0
    for j in range(k):
        out *= (alpha - j) / (j + 1)
    return out


def falling_factorial(alpha: float, k: int) -> float:
    """prod_{j=0}^{k-1} (alpha - j); equals k! * binom_ext(alpha, k)."""
    out = 1.0
    for j in range(k):
        out *= alpha - j
    return out


@functools.lru_cache(maxsize=None)
def _onesided_fd_coeffs(k: int) -> np.ndarray:
    """Forward-difference coefficients for the k-th derivative on nodes 0..k+1.

    One extra node gives O(h^2) accuracy. Solves the Vandermonde system
    sum_i c_i * i^m = k! * delta_{m,k} for m = 0..k+1.
    """
    n = k + 2
    nodes = np.arange(n, dtype=float)
    V = np.vander(nodes, n, increasing=True).T  # V[m, i] = i^m
    rhs = np.zeros(n)
    rhs[k] = float(math.factorial(k))
    return np.linalg.solve(V, rhs)


def onesided_derivative(f, x, k: int, side: str = "right", h: float | None = None):
    """k-th one-sided derivative of f at x by an O(h^2) one-sided stencil.

    Step defaults to max(x, 1) * eps^(1/(k+2)). `x` may be an array; the
    stencil stays strictly on the requested side of each point.
    """
    if k == 0:
        return f(x)
    x = np.asarray(x, dtype=float)
    if h is None:
        h = np.maximum(np.abs(x), 1.0) * MACHINE_EPS ** (1.0 / (k + 2))
    sign = 1.0 if side == "right" else -1.0
    coeffs = _onesided_fd_coeffs(k)
    acc = np.zeros_like(x)
    for i, c in enumerate(coeffs):
        acc = acc + c * np.asarray(f(x + sign * i * h), dtype=float)
    return acc / (sign * h) ** k


def bisect_increasing(f, target, lo: float, hi: float, tol: float = 1e-13,
                      max_iter: int = 200):
    """Solve f(x) = target for nondecreasing f on [lo, hi] by bisection.

    Returns the leftmost point where f crosses target, to absolute
    tolerance `tol` in x. Vectorized over `target`.
    """
    target = np.asarray(target, dtype=float)
    lo_arr = np.full(target.shape, float(lo))
    hi_arr = np.full(target.shape, float(hi))
    for _ in range(max_iter):
        if np.all(hi_arr - lo_arr <= tol):
            break
        mid = 0.5 * (lo_arr + hi_arr)
        below = np.asarray(f(mid)) < target
        lo_arr = np.where(below, mid, lo_arr)
        hi_arr = np.where(below, hi_arr, mid)
    out = 0.5 * (lo_arr + hi_arr)
    return out if out.shape else float(out)


def expand_upper_bracket(f, target, hi: float = 1.0, factor: float = 2.0,
                         limit: float = 1e300) -> float:
    """Grow `hi` geometrically until f(hi) >= target (f nondecreasing).

    Raises RuntimeError when the bracket cannot be established below `limit`,
    which signals a CDF plateau or a non-convergent tail.
    """
    while f(hi) < target:
        hi *= factor
        if hi > limit:
            raise RuntimeError(
                "bracket expansion failed: function stays below target up to %g" % limit)
    return hi
