"""Archimedean generator families.

A generator is a continuous nonincreasing function psi: [0, inf) -> [0, 1]
with psi(0) = 1 and limit 0, strictly decreasing until it first hits 0.
Each family ships closed-form evaluation, inverse and one-sided derivatives;
numeric fallbacks (bracketed bisection, one-sided finite differences) cover
custom generators.
"""

from __future__ import annotations

import math

import numpy as np

from ._numeric import (
    bisect_increasing,
    expand_upper_bracket,
    falling_factorial,
    onesided_derivative,
)

__all__ = [
    "Generator",
    "ClaytonGenerator",
    "IndependenceGenerator",
    "LowerBoundGenerator",
    "ReciprocalUniformGenerator",
    "PowerKinkGenerator",
    "DiscreteRadialGenerator",
    "PiecewiseQuadraticGenerator",
    "CustomGenerator",
    "make_family",
    "generator_from_dict",
]

# Sentinel for families whose derivatives exist in closed form at every order.
UNBOUNDED_ORDER = 1_000_000


def _call_elementwise(x, fn):
    """Apply fn to x as a float array, returning a float for scalar input."""
    arr = np.asarray(x, dtype=float)
    out = fn(arr)
    if arr.ndim == 0:
        return float(out)
    return out


class Generator:
    """Base Archimedean generator with numeric fallbacks.

    Subclasses set `family_id`, `params`, `kink_points` (ordered x-locations
    where some derivative is discontinuous) and `max_analytic_order`, and
    override `psi`; closed-form inverses/derivatives are optional.
    """

    family_id = "custom"

    def __init__(self, d_context: int):
        if int(d_context) != d_context or d_context < 2:
            raise ValueError("d_context must be an integer >= 2")
        self.d_context = int(d_context)
        self.params: dict = {}
        self.kink_points: tuple = ()
        self.max_analytic_order = 0

    # -- evaluation ---------------------------------------------------------

    def psi(self, x):
        raise NotImplementedError

    @property
    def x0(self) -> float:
        """inf{x : psi(x) = 0}; +inf for strict generators."""
        return math.inf

    @property
    def is_strict(self) -> bool:
        return math.isinf(self.x0)

    def psi_inv(self, u):
        """Generalized inverse of psi on [0, 1].

        psi_inv(0) is x0 (+inf for strict generators). Without a closed form
        the root is bracketed by geometric expansion from 1 and bisected to
        1e-13 absolute.
        """
        return _call_elementwise(u, self._inv_numeric)

    def _inv_numeric(self, u):
        u = np.atleast_1d(u)
        out = np.empty(u.shape)
        out[u >= 1.0] = 0.0
        zero = u <= 0.0
        out[zero] = self.x0
        inner = (~zero) & (u < 1.0)
        if np.any(inner):
            umin = float(u[inner].min())
            if math.isfinite(self.x0):
                hi = self.x0
            else:
                hi = expand_upper_bracket(lambda h: -float(self.psi(h)), -umin)
            out[inner] = bisect_increasing(
                lambda x: -np.asarray(self.psi(x)), -u[inner], 0.0, hi)
        return out if out.shape != (1,) else out[0]

    def psi_deriv(self, x, k: int = 1, side: str = "right"):
        """One-sided k-th derivative of psi at x > 0.

        Closed form when k <= max_analytic_order, otherwise an O(h^2)
        one-sided finite-difference stencil with step
        max(x, 1) * eps^(1/(k+2)). Divergent derivatives come back
        non-finite rather than silently wrong.
        """
        if side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        if k == 0:
            return self.psi(x)
        if k <= self.max_analytic_order:
            return _call_elementwise(x, lambda a: self._deriv_closed(a, k, side))
        return _call_elementwise(
            x, lambda a: onesided_derivative(self.psi, a, k, side=side))

    def _deriv_closed(self, x, k, side):
        raise NotImplementedError

    # -- plumbing -----------------------------------------------------------

    def rescaled(self, scale: float) -> "Generator":
        """Generator x -> psi(x / scale); generates the same copula."""
        return _ScaledGenerator(self, scale)

    def to_dict(self) -> dict:
        return {
            "family": self.family_id,
            "params": dict(self.params),
            "d_context": self.d_context,
        }

    def __repr__(self):
        ps = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{type(self).__name__}({ps}, d={self.d_context})"


class ClaytonGenerator(Generator):
    """psi_theta(x) = (1 + theta x)_+^(-1/theta); exact exp(-x) at theta = 0.

    Admissible at dimension d iff theta >= -1/(d-1). Strict for theta >= 0;
    for theta < 0 the generator hits 0 at x0 = -1/theta.
    """

    family_id = "clayton"

    def __init__(self, theta: float, d_context: int):
        super().__init__(d_context)
        theta = float(theta)
        bound = -1.0 / (self.d_context - 1)
        if theta < bound:
            raise ValueError(
                f"clayton: theta={theta} violates theta >= -1/(d-1) = {bound} "
                f"at d={self.d_context}")
        self.theta = theta
        self.params = {"theta": theta}
        self.max_analytic_order = UNBOUNDED_ORDER
        self.kink_points = (self.x0,) if theta < 0 else ()

    @property
    def x0(self):
        return -1.0 / self.theta if self.theta < 0 else math.inf

    def psi(self, x):
        def f(a):
            if self.theta == 0.0:
                return np.exp(-a)
            with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
                pw = self.theta * a
                out = np.where(pw > -1.0,
                               np.exp(-np.log1p(np.maximum(pw, -1.0)) / self.theta),
                               0.0)
            return np.where(np.isposinf(a), 0.0, out)
        return _call_elementwise(x, f)

    def psi_inv(self, u):
        def f(a):
            a = np.clip(a, 0.0, 1.0)
            if self.theta == 0.0:
                with np.errstate(divide="ignore"):
                    return -np.log(a)
            with np.errstate(divide="ignore", over="ignore"):
                out = np.where(a > 0.0,
                               np.expm1(-self.theta * np.log(np.maximum(a, 1e-320)))
                               / self.theta,
                               self.x0)
            return out
        return _call_elementwise(u, f)

    def _deriv_closed(self, x, k, side):
        if self.theta == 0.0:
            return (-1.0) ** k * np.exp(-x)
        coeff = 1.0
        for j in range(k):
            coeff *= 1.0 + j * self.theta
        expo = -1.0 / self.theta - k
        base = np.maximum(1.0 + self.theta * x, 0.0)
        if self.theta < 0:
            if side == "left":
                base = np.where(x >= self.x0, 0.0, base)
                live = x <= self.x0
            else:
                live = x < self.x0
        else:
            live = np.ones_like(base, dtype=bool)
        with np.errstate(divide="ignore"):
            val = (-1.0) ** k * coeff * base ** expo
        return np.where(live, val, 0.0)


class IndependenceGenerator(ClaytonGenerator):
    """psi(x) = exp(-x); generates the independence copula in any dimension."""

    family_id = "independence"

    def __init__(self, d_context: int):
        super().__init__(0.0, d_context)
        self.params = {}


class LowerBoundGenerator(Generator):
    """psi(x) = (1 - x)_+^(d-1), the generator of the sharp PLOD lower bound.

    d-monotone at its own d but not at d+1 (the (d-1)-th derivative jumps
    at x = 1).
    """

    family_id = "lower_bound"

    def __init__(self, d_context: int):
        super().__init__(d_context)
        self.max_analytic_order = UNBOUNDED_ORDER
        self.kink_points = (1.0,)

    @property
    def x0(self):
        return 1.0

    def psi(self, x):
        d = self.d_context
        return _call_elementwise(x, lambda a: np.maximum(1.0 - a, 0.0) ** (d - 1))

    def psi_inv(self, u):
        d = self.d_context
        return _call_elementwise(
            u, lambda a: 1.0 - np.clip(a, 0.0, 1.0) ** (1.0 / (d - 1)))

    def _deriv_closed(self, x, k, side):
        m = self.d_context - 1
        coeff = (-1.0) ** k * falling_factorial(m, k)
        if coeff == 0.0:
            return np.zeros_like(x)
        base = np.maximum(1.0 - x, 0.0)
        if side == "left":
            base = np.where(x >= 1.0, 0.0, base)
            live = x <= 1.0
        else:
            live = x < 1.0
        return np.where(live, coeff * base ** (m - k), 0.0)


class ReciprocalUniformGenerator(Generator):
    """Generator of the radial law 1/U with U uniform on [1/b, 1/a], 0 < a < b.

    psi(x) = a b / (x d (b-a)) * ((1 - x/b)_+^d - (1 - x/a)_+^d). For x < a
    the equivalent factorized form (1/d) * sum_i p^i q^(d-1-i) with
    p = 1 - x/b, q = 1 - x/a is used; it has no 0/0 cancellation at x -> 0.
    """

    family_id = "reciprocal_uniform"

    def __init__(self, a: float, b: float, d_context: int):
        super().__init__(d_context)
        a, b = float(a), float(b)
        if not 0 < a < b:
            raise ValueError(f"reciprocal_uniform: requires 0 < a < b, got a={a}, b={b}")
        self.a, self.b = a, b
        self.params = {"a": a, "b": b}
        self.max_analytic_order = UNBOUNDED_ORDER
        self.kink_points = (a, b)

    @property
    def x0(self):
        return self.b

    def psi(self, x):
        a, b, d = self.a, self.b, self.d_context

        def f(xx):
            p = np.maximum(1.0 - xx / b, 0.0)
            q = np.maximum(1.0 - xx / a, 0.0)
            inner = np.zeros_like(xx)
            for i in range(d):
                inner = inner + p ** i * q ** (d - 1 - i)
            low = inner / d
            with np.errstate(divide="ignore", invalid="ignore"):
                high = a * b / (np.maximum(xx, a) * d * (b - a)) * p ** d
            return np.where(xx < a, low, np.where(np.isposinf(xx), 0.0, high))
        return _call_elementwise(x, f)

    def _deriv_closed(self, x, k, side):
        a, b, d = self.a, self.b, self.d_context
        # branch selection honors the side at the joins x = a and x = b
        if side == "left":
            in_low = x <= a
            in_mid = (x > a) & (x <= b)
        else:
            in_low = x < a
            in_mid = (x >= a) & (x < b)
        out = np.zeros_like(x)
        if np.any(in_low):
            xx = x[in_low] if x.ndim else x
            p = 1.0 - xx / b
            q = 1.0 - xx / a
            acc = np.zeros_like(p)
            for i in range(d):
                j = d - 1 - i
                for m in range(k + 1):
                    fi = falling_factorial(i, m)
                    fj = falling_factorial(j, k - m)
                    if fi == 0.0 or fj == 0.0:
                        continue
                    term = (math.comb(k, m) * fi * (-1.0 / b) ** m
                            * fj * (-1.0 / a) ** (k - m)
                            * p ** (i - m) * q ** (j - (k - m)))
                    acc = acc + term
            val = acc / d
            if x.ndim:
                out[in_low] = val
            else:
                out = np.where(in_low, val, out)
        if np.any(in_mid):
            xx = x[in_mid] if x.ndim else x
            p = np.maximum(1.0 - xx / b, 0.0)
            c = a * b / (d * (b - a))
            acc = np.zeros_like(p)
            for j in range(k + 1):
                fd = falling_factorial(d, k - j)
                if fd == 0.0:
                    continue
                term = (math.comb(k, j) * (-1.0) ** j * math.factorial(j)
                        * xx ** (-1.0 - j)
                        * fd * (-1.0 / b) ** (k - j) * p ** (d - (k - j)))
                acc = acc + term
            val = c * acc
            if x.ndim:
                out[in_mid] = val
            else:
                out = np.where(in_mid, val, out)
        return out


class PowerKinkGenerator(Generator):
    """psi(t) = (1 - t^(1/theta))_+, theta >= 1; bivariate only.

    Convex, hence in Psi_2, but psi' jumps at t = 1 for theta > 1, so the
    copula has a singular component with radial mass 1/theta at 1.
    """

    family_id = "power_kink"

    def __init__(self, theta: float, d_context: int):
        if d_context != 2:
            raise ValueError("power_kink: only d_context = 2 is admissible")
        super().__init__(d_context)
        theta = float(theta)
        if theta < 1.0:
            raise ValueError(f"power_kink: requires theta >= 1, got {theta}")
        self.theta = theta
        self.params = {"theta": theta}
        self.max_analytic_order = UNBOUNDED_ORDER
        self.kink_points = (1.0,)

    @property
    def x0(self):
        return 1.0

    def psi(self, x):
        beta = 1.0 / self.theta
        return _call_elementwise(
            x, lambda a: np.maximum(1.0 - a ** beta, 0.0))

    def psi_inv(self, u):
        return _call_elementwise(
            u, lambda a: (1.0 - np.clip(a, 0.0, 1.0)) ** self.theta)

    def _deriv_closed(self, x, k, side):
        beta = 1.0 / self.theta
        coeff = -falling_factorial(beta, k)
        live = (x <= 1.0) if side == "left" else (x < 1.0)
        with np.errstate(divide="ignore"):
            val = coeff * x ** (beta - k)
        return np.where(live, val, 0.0)


class DiscreteRadialGenerator(Generator):
    """Transform of a finite atom law: psi(x) = sum_i p_i (1 - x/t_i)_+^(d-1).

    Every atom location induces a jump in the (d-1)-th derivative, so the
    copula concentrates mass p_i on the level set at s = psi(t_i).
    """

    family_id = "discrete_radial"

    def __init__(self, atoms, d_context: int):
        super().__init__(d_context)
        pairs = sorted((float(t), float(p)) for t, p in atoms)
        if not pairs:
            raise ValueError("discrete_radial: atom list is empty")
        if any(t <= 0 for t, _ in pairs):
            raise ValueError("discrete_radial: atom locations must be > 0")
        if any(p <= 0 for _, p in pairs):
            raise ValueError("discrete_radial: atom masses must be > 0")
        total = sum(p for _, p in pairs)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(
                f"discrete_radial: atom masses sum to {total}, expected 1")
        self.atoms = tuple((t, p / total) for t, p in pairs)
        self.params = {"atoms": [[t, p] for t, p in self.atoms]}
        self.max_analytic_order = UNBOUNDED_ORDER
        self.kink_points = tuple(t for t, _ in self.atoms)

    @property
    def x0(self):
        return self.atoms[-1][0]

    def psi(self, x):
        d = self.d_context

        def f(a):
            out = np.zeros_like(a)
            for t, p in self.atoms:
                out = out + p * np.maximum(1.0 - a / t, 0.0) ** (d - 1)
            return out
        return _call_elementwise(x, f)

    def _deriv_closed(self, x, k, side):
        m = self.d_context - 1
        ff = falling_factorial(m, k)
        if ff == 0.0:
            return np.zeros_like(x)
        out = np.zeros_like(x)
        for t, p in self.atoms:
            base = np.maximum(1.0 - x / t, 0.0)
            if side == "left":
                base = np.where(x >= t, 0.0, base)
                live = x <= t
            else:
                live = x < t
            term = p * (-1.0) ** k * ff * t ** (-k) * base ** (m - k)
            out = out + np.where(live, term, 0.0)
        return out


class PiecewiseQuadraticGenerator(Generator):
    """Hard-coded C^1 quadratic spline generator, bivariate only.

    Branches (8x^2 - 16x + 7)/7 on [0, 0.5), (16x^2 - 24x + 9)/7 on
    [0.5, 0.75), 0 beyond. psi' is absolutely continuous but -psi' is not
    convex, so this generator sits in Psi_2 but not Psi_3; it exercises the
    dimension-limited path of the monotonicity checker.
    """

    family_id = "piecewise_quadratic"

    # branch coefficients (c2, c1, c0) on [0, 0.5) and [0.5, 0.75)
    _B1 = (8.0 / 7.0, -16.0 / 7.0, 1.0)
    _B2 = (16.0 / 7.0, -24.0 / 7.0, 9.0 / 7.0)

    def __init__(self, d_context: int = 2):
        if d_context != 2:
            raise ValueError("piecewise_quadratic: only d_context = 2 is admissible")
        super().__init__(d_context)
        self.max_analytic_order = UNBOUNDED_ORDER
        self.kink_points = (0.5, 0.75)

    @property
    def x0(self):
        return 0.75

    def psi(self, x):
        def f(a):
            b1 = self._B1[0] * a * a + self._B1[1] * a + self._B1[2]
            b2 = self._B2[0] * a * a + self._B2[1] * a + self._B2[2]
            return np.where(a < 0.5, b1, np.where(a < 0.75, b2, 0.0))
        return _call_elementwise(x, f)

    def psi_inv(self, u):
        def f(a):
            a = np.clip(a, 0.0, 1.0)
            hi = 1.0 - np.sqrt(32.0 + 224.0 * a) / 16.0
            lo = 0.75 - np.sqrt(448.0 * a) / 32.0
            return np.where(a >= 1.0 / 7.0, hi, lo)
        return _call_elementwise(u, f)

    def _deriv_closed(self, x, k, side):
        if k > 2:
            return np.zeros_like(x)
        if side == "left":
            sel1, sel2 = x <= 0.5, (x > 0.5) & (x <= 0.75)
        else:
            sel1, sel2 = x < 0.5, (x >= 0.5) & (x < 0.75)
        if k == 1:
            b1 = 2.0 * self._B1[0] * x + self._B1[1]
            b2 = 2.0 * self._B2[0] * x + self._B2[1]
        else:
            b1 = np.full_like(x, 2.0 * self._B1[0])
            b2 = np.full_like(x, 2.0 * self._B2[0])
        return np.where(sel1, b1, np.where(sel2, b2, 0.0))


class CustomGenerator(Generator):
    """Generator wrapping user callables; numeric fallbacks fill the gaps.

    `psi_fn` is required. Missing inverses fall back to bracketed bisection
    and missing derivatives to one-sided finite differences, so atom
    detection for custom generators is heuristic unless `kink_points` is
    declared.
    """

    family_id = "custom"

    def __init__(self, psi_fn, d_context: int, psi_inv_fn=None, deriv_fn=None,
                 kink_points=(), max_analytic_order: int = 0, x0: float = math.inf):
        super().__init__(d_context)
        self._psi_fn = psi_fn
        self._psi_inv_fn = psi_inv_fn
        self._deriv_fn = deriv_fn
        self.kink_points = tuple(sorted(float(t) for t in kink_points))
        self.max_analytic_order = max_analytic_order if deriv_fn is not None else 0
        self._x0 = float(x0)
        self.params = {}

    @property
    def x0(self):
        return self._x0

    def psi(self, x):
        return _call_elementwise(x, lambda a: np.asarray(self._psi_fn(a), dtype=float))

    def psi_inv(self, u):
        if self._psi_inv_fn is not None:
            return _call_elementwise(
                u, lambda a: np.asarray(self._psi_inv_fn(a), dtype=float))
        return super().psi_inv(u)

    def _deriv_closed(self, x, k, side):
        return np.asarray(self._deriv_fn(x, k, side), dtype=float)


class _ScaledGenerator(Generator):
    """x -> psi(x / scale); same copula, radial law stretched by `scale`."""

    family_id = "custom"

    def __init__(self, base: Generator, scale: float):
        super().__init__(base.d_context)
        if scale <= 0:
            raise ValueError("scale must be > 0")
        self.base = base
        self.scale = float(scale)
        self.params = {"base_family": base.family_id, "scale": self.scale,
                       **{f"base_{k}": v for k, v in base.params.items()}}
        self.max_analytic_order = base.max_analytic_order
        self.kink_points = tuple(self.scale * t for t in base.kink_points)

    @property
    def x0(self):
        return self.scale * self.base.x0

    def psi(self, x):
        return _call_elementwise(x, lambda a: np.asarray(self.base.psi(a / self.scale)))

    def psi_inv(self, u):
        return _call_elementwise(
            u, lambda a: self.scale * np.asarray(self.base.psi_inv(a)))

    def _deriv_closed(self, x, k, side):
        return np.asarray(
            self.base.psi_deriv(x / self.scale, k, side)) / self.scale ** k


_FAMILIES = {
    "clayton": lambda params, d: ClaytonGenerator(params["theta"], d),
    "independence": lambda params, d: IndependenceGenerator(d),
    "lower_bound": lambda params, d: LowerBoundGenerator(d),
    "reciprocal_uniform": lambda params, d: ReciprocalUniformGenerator(
        params["a"], params["b"], d),
    "power_kink": lambda params, d: PowerKinkGenerator(params["theta"], d),
    "discrete_radial": lambda params, d: DiscreteRadialGenerator(
        params["atoms"], d),
    "piecewise_quadratic": lambda params, d: PiecewiseQuadraticGenerator(d),
}


def make_family(family_id: str, params: dict | None, d_context: int) -> Generator:
    """Construct a built-in generator, validating parameters for d_context.

    Raises ValueError naming the violated constraint for out-of-range
    parameters; evaluation never raises afterwards.
    """
    if family_id not in _FAMILIES:
        raise ValueError(
            f"unknown family '{family_id}'; expected one of {sorted(_FAMILIES)}")
    try:
        return _FAMILIES[family_id](params or {}, d_context)
    except KeyError as exc:
        raise ValueError(f"{family_id}: missing parameter {exc}") from None


def generator_from_dict(spec: dict) -> Generator:
    """Inverse of Generator.to_dict for the built-in families."""
    return make_family(spec["family"], spec.get("params", {}), spec["d_context"])
