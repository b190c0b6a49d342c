"""Thin wrapper over scipy's adaptive quadrature with tolerance enforcement."""

from __future__ import annotations

import numpy as np
from scipy import integrate


class QuadratureError(RuntimeError):
    """Raised when adaptive quadrature misses the requested tolerance."""


def integrate_tol(f, a: float, b: float, epsabs: float = 1e-10,
                  points=None) -> float:
    """Adaptive quadrature of f over [a, b], enforcing `epsabs`.

    Breakpoints in `points` are honored even with an infinite upper limit
    (the interval is split there first). Raises QuadratureError carrying the
    achieved error estimate when convergence fails.
    """
    pts = sorted(p for p in (points or ()) if a < p < b and np.isfinite(p))
    if np.isinf(b) and pts:
        split = pts[-1]
        lo = integrate_tol(f, a, split, epsabs=epsabs / 2, points=pts[:-1])
        hi = integrate_tol(f, split, b, epsabs=epsabs / 2)
        return lo + hi
    kw = {"points": pts} if (pts and np.isfinite(b)) else {}
    val, abserr = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsabs,
                                 limit=400, **kw)[:2]
    if abserr > max(50 * epsabs, 1e-9):
        raise QuadratureError(
            f"quadrature over [{a}, {b}] achieved abs error {abserr:.3e}, "
            f"requested {epsabs:.3e}")
    return val
