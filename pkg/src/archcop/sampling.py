"""Stochastic simulation: uniform simplex law, the general radial sampling
algorithm for Archimedean copulas, and the frailty sampler for the Clayton
family as an independent cross-check."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .generators import ClaytonGenerator, Generator
from .williamson import radial_from_generator

__all__ = [
    "RandomStream",
    "SampleMatrix",
    "sample_simplex",
    "sample_copula",
    "sample_frailty_clayton",
]


class RandomStream:
    """Counter-based uniform stream (Philox) with an explicit 64-bit seed.

    The bit stream is defined by the Philox4x64 algorithm, not a platform
    default, so identical seeds give identical draws everywhere. Substreams
    for parallel work are derived by re-keying, never by sharing state.
    """

    def __init__(self, seed: int, stream: int = 0):
        seed = int(seed)
        if not 0 <= seed < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")
        self.seed = seed
        self.stream = int(stream)
        key = np.array([seed, self.stream], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def spawn(self, index: int) -> "RandomStream":
        """Independent derived stream; use one per thread."""
        return RandomStream(self.seed, self.stream + 1 + int(index))

    def uniform(self, shape):
        """Uniform draws on [0, 1)."""
        return self._gen.random(shape)

    def exponential(self, shape):
        """Standard exponential draws by inversion, -log1p(-U)."""
        return -np.log1p(-self._gen.random(shape))


@dataclass
class SampleMatrix:
    """n x d matrix of copula observations with provenance metadata."""

    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("values must be an n x d matrix")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def to_csv(self, path) -> None:
        """CSV with header u1..ud, LF line endings, shortest round-trip
        float formatting."""
        header = ",".join(f"u{i + 1}" for i in range(self.d))
        with open(path, "w", newline="") as fh:
            fh.write(header + "\n")
            for row in self.values:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")

    @classmethod
    def from_csv(cls, path, meta: dict | None = None) -> "SampleMatrix":
        with open(path, "r", newline="") as fh:
            header = fh.readline().strip()
            cols = header.split(",")
            if not all(c.startswith("u") for c in cols):
                raise ValueError(f"unexpected CSV header: {header!r}")
            values = np.loadtxt(fh, delimiter=",", ndmin=2)
        return cls(values=values, meta=dict(meta or {}))


def sample_simplex(rng: RandomStream, d: int, n: int | None = None):
    """Uniform draws on the unit simplex via normalized i.i.d. exponentials.

    Returns shape (d,) for n=None, else (n, d). Rows are renormalized once
    more after the division so each sums to 1 up to rounding.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    rows = 1 if n is None else int(n)
    y = rng.exponential((rows, d))
    s = y / y.sum(axis=1, keepdims=True)
    s /= s.sum(axis=1, keepdims=True)
    return s[0] if n is None else s


def _chunked_rows(fn, n: int, threads: int):
    """Apply fn(start, stop) over fixed 16384-row chunks, optionally in a
    thread pool; chunk boundaries are independent of `threads` so results
    never depend on the level of parallelism."""
    chunk = 16384
    spans = [(i, min(i + chunk, n)) for i in range(0, n, chunk)]
    if threads <= 1 or len(spans) == 1:
        parts = [fn(a, b) for a, b in spans]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda ab: fn(*ab), spans))
    return np.concatenate(parts, axis=0)


def sample_copula(g: Generator, d: int, n: int, rng: RandomStream,
                  threads: int = 1, grid_cache: bool = False) -> SampleMatrix:
    """n i.i.d. rows from the copula generated by psi at dimension d.

    Draws S uniform on the simplex and R from the radial law associated
    with psi (by inversion), independently, and returns U_i = psi(R * S_i).
    """
    radial = radial_from_generator(g, d)
    s = sample_simplex(rng, d, n)
    u_radial = rng.uniform(n)
    u_radial[u_radial == 0.0] = np.nextafter(0.0, 1.0)

    def transform(a, b):
        if grid_cache:
            r = radial._grid_quantile(u_radial[a:b])
        else:
            r = radial.quantile(u_radial[a:b])
        return np.asarray(g.psi(r[:, None] * s[a:b]))

    values = _chunked_rows(transform, n, threads)
    meta = {"family": g.family_id, "params": dict(g.params), "d": int(d),
            "n": int(n), "seed": rng.seed, "algorithm": "radial-simplex"}
    return SampleMatrix(values=values, meta=meta)


def sample_frailty_clayton(theta: float, d: int, n: int,
                           rng: RandomStream) -> SampleMatrix:
    """Clayton sampler through the mixed-exponential (frailty) construction.

    U_i = psi_theta(Y_i / W) with Y i.i.d. standard exponential and W the
    Gamma(1/theta, scale=theta) mixing variable (drawn by inversion), whose
    Laplace transform is psi_theta. Distributionally identical to
    sample_copula on the Clayton generator; kept as an independent oracle.
    """
    if theta <= 0:
        raise ValueError("frailty construction requires theta > 0")
    g = ClaytonGenerator(theta, max(d, 2))
    y = rng.exponential((n, d))
    u = rng.uniform(n)
    u = np.clip(u, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
    w = theta * special.gammaincinv(1.0 / theta, u)
    values = np.asarray(g.psi(y / w[:, None]))
    meta = {"family": "clayton", "params": {"theta": float(theta)},
            "d": int(d), "n": int(n), "seed": rng.seed, "algorithm": "frailty"}
    return SampleMatrix(values=values, meta=meta)
