"""Concrete radial-distribution object: mixed CDF, quantile, sampling,
expectations against a generator."""

from __future__ import annotations

import math

import numpy as np

from ._numeric import bisect_increasing, expand_upper_bracket
from ._quadrature import integrate_tol

__all__ = ["RadialDistribution"]


class RadialDistribution:
    """Law of a nonnegative radial variable: an absolutely continuous part
    plus an explicit atom list.

    Parameters
    ----------
    continuous_cdf : callable
        Monotone evaluator of the AC component on [0, inf) (carries the
        total mass not in the atoms). Vectorized over numpy arrays.
    atoms : sequence of (location, mass)
        Atom locations (> 0) with masses in (0, 1].
    support : (float, float)
        Hint (0, upper); upper may be +inf.
    """

    def __init__(self, continuous_cdf=None, atoms=(), support=(0.0, math.inf),
                 label: str = ""):
        self._cont = continuous_cdf
        self.atoms = tuple(sorted((float(t), float(p)) for t, p in atoms))
        if any(t <= 0 for t, _ in self.atoms):
            raise ValueError("atom locations must be > 0")
        if any(p <= 0 for _, p in self.atoms):
            raise ValueError("atom masses must be > 0")
        self.atom_mass = sum(p for _, p in self.atoms)
        if self.atom_mass > 1.0 + 1e-9:
            raise ValueError(f"atom masses sum to {self.atom_mass} > 1")
        self.support = (float(support[0]), float(support[1]))
        self.label = label
        self._locs = np.array([t for t, _ in self.atoms])
        self._masses = np.array([p for _, p in self.atoms])
        self._quantile_knots = None

    @classmethod
    def from_atoms(cls, atoms, label: str = "") -> "RadialDistribution":
        """Purely atomic law; masses must sum to 1."""
        atoms = tuple((float(t), float(p)) for t, p in atoms)
        total = sum(p for _, p in atoms)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"atom masses sum to {total}, expected 1")
        upper = max(t for t, _ in atoms)
        return cls(continuous_cdf=None, atoms=atoms, support=(0.0, upper),
                   label=label)

    # -- distribution function ----------------------------------------------

    def cdf(self, x):
        """Right-continuous total CDF; 0 for x < 0."""
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(arr.shape)
        if self._cont is not None:
            out = np.atleast_1d(np.asarray(self._cont(np.maximum(arr, 0.0)),
                                           dtype=float)).copy()
        if self._locs.size:
            out = out + self._masses @ (self._locs[:, None] <= arr[None, :])
        out = np.clip(np.where(arr < 0, 0.0, out), 0.0, 1.0)
        return float(out[0]) if np.asarray(x).ndim == 0 else out

    def cdf_left(self, x):
        """Left limit of the CDF: atoms strictly below x."""
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(arr.shape)
        if self._cont is not None:
            out = np.atleast_1d(np.asarray(self._cont(np.maximum(arr, 0.0)),
                                           dtype=float)).copy()
        if self._locs.size:
            out = out + self._masses @ (self._locs[:, None] < arr[None, :])
        out = np.clip(np.where(arr <= 0, 0.0, out), 0.0, 1.0)
        return float(out[0]) if np.asarray(x).ndim == 0 else out

    # -- quantiles and sampling ---------------------------------------------

    def quantile(self, u):
        """Generalized inverse inf{x : cdf(x) >= u} for u in (0, 1).

        Exact at atoms (u inside an atom's mass interval returns the
        location); the continuous part is bisected to 1e-12 absolute with
        the bracket taken from the support hint, geometrically expanded
        when the upper end is infinite.
        """
        arr = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any((arr <= 0.0) | (arr >= 1.0)):
            raise ValueError("quantile requires u in (0, 1)")
        out = np.full(arr.shape, np.nan)
        pending = np.ones(arr.shape, dtype=bool)
        for t, p in self.atoms:
            hi = self.cdf(t)
            lo = hi - p
            inside = pending & (arr > lo) & (arr <= hi)
            out[inside] = t
            pending &= ~inside
        if np.any(pending):
            target = arr[pending]
            hi = self.support[1]
            if not math.isfinite(hi):
                hi = expand_upper_bracket(lambda h: float(self.cdf(h)),
                                          float(target.max()), hi=1.0)
            out[pending] = bisect_increasing(
                lambda x: np.asarray(self.cdf(x)), target, 0.0, hi, tol=1e-12)
        return float(out[0]) if np.asarray(u).ndim == 0 else out

    def _grid_quantile(self, u, n_knots: int = 1024):
        """Approximate quantile via monotone interpolation on cached knots;
        atoms are still matched exactly before interpolation."""
        if self._quantile_knots is None:
            uu = np.linspace(0.5 / n_knots, 1.0 - 0.5 / n_knots, n_knots)
            xx = self.quantile(uu)
            self._quantile_knots = (uu, xx)
        uu, xx = self._quantile_knots
        arr = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.interp(arr, uu, xx)
        for t, p in self.atoms:
            hi = self.cdf(t)
            inside = (arr > hi - p) & (arr <= hi)
            out[inside] = t
        return out

    def sample(self, rng, n: int, grid_cache: bool = False):
        """n i.i.d. draws by inversion: quantile(U_i) with U_i uniform.

        `grid_cache` switches to 1024-knot monotone interpolation of the
        quantile (approximate, faster for very large n).
        """
        if n < 1:
            raise ValueError("n must be >= 1")
        u = rng.uniform(n)
        u[u == 0.0] = np.nextafter(0.0, 1.0)
        if grid_cache:
            return self._grid_quantile(u)
        return self.quantile(u)

    # -- expectations ---------------------------------------------------------

    def expectation_psi(self, g) -> float:
        """E psi(R): exact atom sum plus quadrature against the continuous
        part (deterministic; absolute tolerance 1e-9).

        Uses integration by parts, int psi dF_c = -int psi'(x) F_c(x) dx,
        since only the continuous CDF is available, not a density.
        """
        total = float(sum(p * float(g.psi(t)) for t, p in self.atoms))
        if self._cont is None or self.atom_mass >= 1.0 - 1e-12:
            return total
        upper = self.support[1]
        if not math.isfinite(upper):
            upper = float(g.psi_inv(1e-14))
            if not math.isfinite(upper):
                upper = expand_upper_bracket(
                    lambda h: 1.0 - float(g.psi(h)), 1.0 - 1e-14, hi=1.0)

        def integrand(x):
            return -float(g.psi_deriv(x, 1, "right")) * float(self._cont(x))

        pts = tuple(t for t in getattr(g, "kink_points", ()) if 0 < t < upper)
        total += integrate_tol(integrand, 0.0, upper, epsabs=1e-9, points=pts)
        return total

    def __repr__(self):
        tag = self.label or "radial"
        return (f"RadialDistribution({tag}, atoms={list(self.atoms)}, "
                f"support={self.support})")
