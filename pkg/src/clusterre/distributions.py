"""Mark distributions for claim sizes and external shocks.

Three families are supported, all on (0, +inf):

* ``point``        -- a single atom at ``value``;
* ``uniform``      -- uniform on (a, b);
* ``exponential``  -- rate ``rate``, optionally capped at ``cap`` (the mark
  is then min(Z, cap), i.e. continuous density below the cap plus an atom
  of mass exp(-rate*cap) at the cap itself).

Besides sampling and moments, the class exposes the exact partial
exponential integrals

    exp_tail(s, x)   = E[ exp(-s Z) 1{Z > x} ]
    x_exp_tail(s, x) = E[ Z exp(-s Z) 1{Z > x} ]

which every premium, threshold and driver integral in the package reduces
to, so those quantities carry no quadrature error.  A generic ``expect``
(fixed-order Gauss quadrature) is kept for test cross-checks and for
integrands with no closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["MarkDistribution"]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
_LAG_NODES, _LAG_WEIGHTS = np.polynomial.laguerre.laggauss(64)


def _phi1(x):
    """(1 - exp(-x)) / x, stable near 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-12
    safe = np.where(small, 1.0, x)
    out = -np.expm1(-safe) / safe
    return np.where(small, 1.0 - x / 2.0, out)


def _phi2(x):
    """(1 - (1+x) exp(-x)) / x^2, stable near 0; equals 1/2 at 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-3
    safe = np.where(small, 1.0, x)
    out = (-np.expm1(-safe) - safe * np.exp(-safe)) / safe**2
    series = 0.5 - x / 3.0 + x**2 / 8.0 - x**3 / 30.0
    return np.where(small, series, out)


def _int_exp(s, lo, hi):
    """integral_lo^hi exp(-s z) dz for hi >= lo >= 0, s >= 0."""
    d = hi - lo
    return np.exp(-s * lo) * d * _phi1(s * d)


def _int_x_exp(s, lo, hi):
    """integral_lo^hi z exp(-s z) dz."""
    d = hi - lo
    return np.exp(-s * lo) * (lo * d * _phi1(s * d) + d**2 * _phi2(s * d))


@dataclass(frozen=True)
class MarkDistribution:
    kind: str
    value: float = 0.0        # point
    a: float = 0.0            # uniform lower
    b: float = 0.0            # uniform upper
    rate: float = 0.0         # exponential
    cap: float | None = None  # exponential cap (None = untruncated)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def point(value: float) -> "MarkDistribution":
        if value <= 0:
            raise ValueError(f"point mass must be positive, got {value}")
        return MarkDistribution("point", value=float(value))

    @staticmethod
    def uniform(a: float, b: float) -> "MarkDistribution":
        if not (0 <= a < b):
            raise ValueError(f"uniform needs 0 <= a < b, got ({a}, {b})")
        return MarkDistribution("uniform", a=float(a), b=float(b))

    @staticmethod
    def exponential(rate: float, cap: float | None = None) -> "MarkDistribution":
        if rate <= 0:
            raise ValueError(f"exponential rate must be positive, got {rate}")
        if cap is not None and cap <= 0:
            raise ValueError(f"cap must be positive, got {cap}")
        return MarkDistribution("exponential", rate=float(rate),
                                cap=None if cap is None else float(cap))

    # -- basic properties --------------------------------------------------

    @property
    def bounded(self) -> bool:
        return self.kind in ("point", "uniform") or self.cap is not None

    @property
    def upper(self) -> float:
        """Supremum of the support (inf for untruncated exponential)."""
        if self.kind == "point":
            return self.value
        if self.kind == "uniform":
            return self.b
        return self.cap if self.cap is not None else math.inf

    def effective_upper(self, tail_prob: float = 1e-12) -> float:
        """Finite surrogate for the support upper end (quantile for inf)."""
        u = self.upper
        return u if math.isfinite(u) else self.quantile(1.0 - tail_prob)

    def mean(self) -> float:
        return self.moment(1)

    def moment(self, k: int) -> float:
        """Raw moment E[Z^k] (k >= 0), exact."""
        if k < 0:
            raise ValueError("moment order must be >= 0")
        if k == 0:
            return 1.0
        if self.kind == "point":
            return self.value**k
        if self.kind == "uniform":
            return (self.b**(k + 1) - self.a**(k + 1)) / ((k + 1) * (self.b - self.a))
        r = self.rate
        if self.cap is None:
            return math.factorial(k) / r**k
        from scipy.special import gammainc
        d = self.cap
        return (math.factorial(k) / r**k) * gammainc(k + 1, r * d) + d**k * math.exp(-r * d)

    def variance(self) -> float:
        return self.moment(2) - self.mean() ** 2

    # -- cdf / quantiles / sampling ---------------------------------------

    def cdf(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == "point":
            out = np.where(z >= self.value, 1.0, 0.0)
        elif self.kind == "uniform":
            out = np.clip((z - self.a) / (self.b - self.a), 0.0, 1.0)
        else:
            out = -np.expm1(-self.rate * np.maximum(z, 0.0))
            if self.cap is not None:
                out = np.where(z >= self.cap, 1.0, out)
        return out if out.ndim else float(out)

    def survival(self, z):
        return 1.0 - self.cdf(z)

    def quantile(self, p: float) -> float:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability out of range: {p}")
        if self.kind == "point":
            return self.value
        if self.kind == "uniform":
            return self.a + p * (self.b - self.a)
        if p == 1.0:
            return self.upper
        q = -math.log1p(-p) / self.rate
        return q if self.cap is None else min(q, self.cap)

    def sample(self, rng: np.random.Generator, size=None):
        if self.kind == "point":
            return np.full(size, self.value) if size is not None else self.value
        if self.kind == "uniform":
            return rng.uniform(self.a, self.b, size)
        z = rng.exponential(1.0 / self.rate, size)
        return z if self.cap is None else np.minimum(z, self.cap)

    # -- exponential moments ----------------------------------------------

    def exp_moment(self, s: float) -> float:
        """E[exp(s Z)]; +inf when divergent (untruncated exponential, s >= rate)."""
        if s == 0.0:
            return 1.0
        if self.kind == "point":
            return math.exp(s * self.value)
        if self.kind == "uniform":
            return float(_int_exp(-s, self.a, self.b)) / (self.b - self.a)
        r = self.rate
        if self.cap is None:
            return r / (r - s) if s < r else math.inf
        d = self.cap
        return float(r * _int_exp(r - s, 0.0, d)) + math.exp((s - r) * d)

    def has_exp_moment(self, s: float) -> bool:
        return self.bounded or s < self.rate

    # -- exact partial integrals -------------------------------------------

    def mass(self, lo, hi):
        """P(lo < Z <= hi)."""
        return self.cdf(hi) - self.cdf(lo)

    def exp_tail(self, s, x):
        """E[exp(-s Z) 1{Z > x}] for s >= 0.  Vectorized in s and x."""
        s = np.asarray(s, dtype=float)
        x = np.asarray(x, dtype=float)
        if self.kind == "point":
            out = np.where(self.value > x, np.exp(-s * self.value), 0.0)
        elif self.kind == "uniform":
            m = np.clip(x, self.a, self.b)
            out = _int_exp(s, m, self.b * np.ones_like(m)) / (self.b - self.a)
        else:
            r = self.rate
            m = np.maximum(x, 0.0)
            if self.cap is None:
                out = r / (s + r) * np.exp(-(s + r) * m)
            else:
                d = self.cap
                mc = np.minimum(m, d)
                out = r * _int_exp(s + r, mc, d * np.ones_like(mc))
                out = out + np.where(d > x, np.exp(-(s + r) * d), 0.0)
        return out if out.ndim else float(out)

    def x_exp_tail(self, s, x):
        """E[Z exp(-s Z) 1{Z > x}] for s >= 0.  Vectorized in s and x."""
        s = np.asarray(s, dtype=float)
        x = np.asarray(x, dtype=float)
        if self.kind == "point":
            out = np.where(self.value > x, self.value * np.exp(-s * self.value), 0.0)
        elif self.kind == "uniform":
            m = np.clip(x, self.a, self.b)
            out = _int_x_exp(s, m, self.b * np.ones_like(m)) / (self.b - self.a)
        else:
            r = self.rate
            m = np.maximum(x, 0.0)
            if self.cap is None:
                u = s + r
                out = r * np.exp(-u * m) * (m / u + 1.0 / u**2)
            else:
                d = self.cap
                mc = np.minimum(m, d)
                out = r * _int_x_exp(s + r, mc, d * np.ones_like(mc))
                out = out + np.where(d > x, d * np.exp(-(s + r) * d), 0.0)
        return out if out.ndim else float(out)

    # -- generic quadrature (cross-check path) ------------------------------

    def expect(self, g, lo: float = 0.0, hi: float = math.inf) -> float:
        """E[g(Z) 1{lo < Z <= hi}] by 64-point Gauss rules.

        Exact for atoms; Gauss-Legendre on continuous segments and
        Gauss-Laguerre on the unbounded exponential tail.  Meant for
        integrands without closed form; the exp_tail family is preferred
        where applicable.
        """
        if hi <= lo:
            return 0.0
        total = 0.0
        if self.kind == "point":
            if lo < self.value <= hi:
                total += float(g(self.value))
            return total
        if self.kind == "uniform":
            l, h = max(lo, self.a), min(hi, self.b)
            if h > l:
                z = 0.5 * (h + l) + 0.5 * (h - l) * _GL_NODES
                total += 0.5 * (h - l) * float(np.sum(_GL_WEIGHTS * g(z))) / (self.b - self.a)
            return total
        r = self.rate
        if self.cap is not None:
            d = self.cap
            l, h = max(lo, 0.0), min(hi, d)
            if h > l:
                z = 0.5 * (h + l) + 0.5 * (h - l) * _GL_NODES
                total += 0.5 * (h - l) * float(np.sum(_GL_WEIGHTS * g(z) * r * np.exp(-r * z)))
            if lo < d <= hi:
                total += float(g(d)) * math.exp(-r * d)
            return total
        m = max(lo, 0.0)
        if math.isinf(hi):
            z = m + _LAG_NODES / r
            total += math.exp(-r * m) * float(np.sum(_LAG_WEIGHTS * g(z)))
        else:
            z = 0.5 * (hi + m) + 0.5 * (hi - m) * _GL_NODES
            total += 0.5 * (hi - m) * float(np.sum(_GL_WEIGHTS * g(z) * r * np.exp(-r * z)))
        return total

    # -- quantile bins -------------------------------------------------------

    def quantile_bins(self, m: int):
        """Equal-probability bin edges and exact per-bin masses.

        Returns ``(edges, probs)`` with ``edges[0] = 0``; duplicate edges
        produced by an atom (capped exponential) are merged, so fewer than
        ``m`` bins may come back.  ``sum(probs) == 1``.
        """
        if m < 1:
            raise ValueError("need at least one bin")
        if self.kind == "point":
            return np.array([0.0, self.value]), np.array([1.0])
        raw = [self.quantile(k / m) for k in range(m + 1)]
        edges = [0.0]
        for e in raw[1:]:
            if e > edges[-1] * (1 + 1e-12) + 1e-300:
                edges.append(e)
        edges = np.asarray(edges, dtype=float)
        if math.isfinite(self.upper):
            edges[-1] = self.upper
        cdf_vals = np.array([0.0] + [self.cdf(e) for e in edges[1:-1]] + [1.0])
        probs = np.diff(cdf_vals)
        return edges, probs

    @staticmethod
    def bin_index(edges: np.ndarray, z):
        """Index of the bin (edges[j], edges[j+1]] containing z."""
        idx = np.searchsorted(edges, z, side="left") - 1
        return np.clip(idx, 0, len(edges) - 2)

    # -- flat config round trip ---------------------------------------------

    def to_config(self, prefix: str) -> dict:
        d = {f"{prefix}_kind": self.kind}
        if self.kind == "point":
            d[f"{prefix}_value"] = self.value
        elif self.kind == "uniform":
            d[f"{prefix}_a"] = self.a
            d[f"{prefix}_b"] = self.b
        else:
            d[f"{prefix}_rate"] = self.rate
            if self.cap is not None:
                d[f"{prefix}_cap"] = self.cap
        return d

    @staticmethod
    def from_config(cfg: dict, prefix: str) -> "MarkDistribution":
        kind = cfg[f"{prefix}_kind"]
        if kind == "point":
            return MarkDistribution.point(float(cfg[f"{prefix}_value"]))
        if kind == "uniform":
            return MarkDistribution.uniform(float(cfg[f"{prefix}_a"]),
                                            float(cfg[f"{prefix}_b"]))
        if kind == "exponential":
            cap = cfg.get(f"{prefix}_cap")
            return MarkDistribution.exponential(
                float(cfg[f"{prefix}_rate"]),
                None if cap in (None, "", "none") else float(cap))
        raise ValueError(f"unknown distribution kind {kind!r}")
