"""Exact path simulation of the contagion claims process.

Simulation under the physical measure uses thinning: between events the
intensity decays monotonically toward the reversion level, so
max(current intensity, beta_rev) is a valid local upper bound and the
scheme is exact (no time discretization anywhere).  Shocks arrive as a
homogeneous Poisson(rho) stream.

Simulation under the reference measure draws both counting processes as
homogeneous Poisson streams (claims at unit rate) and attaches the
likelihood

    L_T = exp( -int_0^T (lambda_s - 1) ds + sum_claims log lambda_{t-} ),

with lambda reconstructed from the same events, so that weighted averages
reproduce physical-measure expectations.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams, decay_integral
from .seeding import derive_rng

__all__ = [
    "EventLog", "QPath", "simulate_path", "simulate_under_q",
    "batch_simulate", "batch_simulate_q", "wealth_path", "log_likelihood",
]

CLAIM, SHOCK = 0, 1
_SOURCE_NAMES = {CLAIM: "claim", SHOCK: "shock"}
_SOURCE_CODES = {"claim": CLAIM, "shock": SHOCK}


@dataclass
class EventLog:
    """One realized marked-point-process path on [0, horizon].

    ``lam_after[i]`` is the intensity immediately after event i, which
    together with ``lambda0`` makes the whole intensity path recoverable in
    closed form (decay between events).
    """
    times: np.ndarray          # strictly increasing, in (0, T]
    sources: np.ndarray        # CLAIM or SHOCK
    marks: np.ndarray          # positive
    lam_after: np.ndarray      # post-event intensity
    lambda0: float
    horizon: float
    alpha: float
    beta_rev: float
    seed: int | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.sources = np.asarray(self.sources, dtype=np.int8)
        self.marks = np.asarray(self.marks, dtype=float)
        self.lam_after = np.asarray(self.lam_after, dtype=float)
        if self.times.size:
            if np.any(np.diff(self.times) <= 0):
                raise ValueError("event times must be strictly increasing")
            if self.times[0] <= 0 or self.times[-1] > self.horizon:
                raise ValueError("event times must lie in (0, horizon]")
            if np.any(self.marks <= 0):
                raise ValueError("marks must be positive")

    @property
    def n_events(self) -> int:
        return int(self.times.size)

    @property
    def n_claims(self) -> int:
        return int(np.sum(self.sources == CLAIM))

    def claims(self):
        """(times, marks) of the observable claim events."""
        idx = self.sources == CLAIM
        return self.times[idx], self.marks[idx]

    @property
    def total_claim_amount(self) -> float:
        return float(np.sum(self.marks[self.sources == CLAIM]))

    def _decay(self, lam, dt):
        return self.beta_rev + (lam - self.beta_rev) * math.exp(-self.alpha * dt)

    def _segment_start(self, t: float):
        """(time, intensity) at the last event <= t (or the origin)."""
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        if i < 0:
            return 0.0, self.lambda0
        return float(self.times[i]), float(self.lam_after[i])

    def lambda_left(self, t: float) -> float:
        """Left limit of the intensity at t (decayed value, pre-jump)."""
        i = int(np.searchsorted(self.times, t, side="left")) - 1
        if i < 0:
            t0, lam = 0.0, self.lambda0
        else:
            t0, lam = float(self.times[i]), float(self.lam_after[i])
        return self._decay(lam, t - t0)

    def lambda_at(self, t: float) -> float:
        """Cadlag value of the intensity at t (post-jump if t is an event)."""
        t0, lam = self._segment_start(t)
        return self._decay(lam, t - t0)

    def integrated_lambda(self, t0: float = 0.0, t1: float | None = None) -> float:
        """integral of lambda over [t0, t1], exact piecewise closed form."""
        if t1 is None:
            t1 = self.horizon
        if not 0.0 <= t0 <= t1 <= self.horizon + 1e-12:
            raise ValueError("integration bounds out of range")
        b, al = self.beta_rev, self.alpha
        total = 0.0
        s, lam = self._segment_start(t0)
        lam = self._decay(lam, t0 - s)
        cur = t0
        i = int(np.searchsorted(self.times, t0, side="right"))
        while i < self.times.size and self.times[i] <= t1:
            dt = float(self.times[i]) - cur
            total += b * dt + (lam - b) * -math.expm1(-al * dt) / al
            cur = float(self.times[i])
            lam = float(self.lam_after[i])
            i += 1
        dt = t1 - cur
        total += b * dt + (lam - b) * -math.expm1(-al * dt) / al
        return total

    # -- CSV round trip -----------------------------------------------------

    CSV_HEADER = "time,source,mark,lambda_after"

    def to_csv(self, comment: str | None = None) -> str:
        buf = io.StringIO()
        if comment:
            buf.write(f"# {comment}\n")
        buf.write(f"# lambda0={self.lambda0!r} horizon={self.horizon!r} "
                  f"alpha={self.alpha!r} beta_rev={self.beta_rev!r}\n")
        buf.write(self.CSV_HEADER + "\n")
        for t, s, z, la in zip(self.times, self.sources, self.marks, self.lam_after):
            buf.write(f"{t!r},{_SOURCE_NAMES[int(s)]},{z!r},{la!r}\n")
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "EventLog":
        meta = {}
        rows = []
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    if "=" in tok:
                        k, v = tok.split("=", 1)
                        meta[k] = v
                continue
            if line == EventLog.CSV_HEADER:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ValueError(f"event log line {ln}: expected 4 columns, got {len(parts)}")
            try:
                t = float(parts[0]); z = float(parts[2]); la = float(parts[3])
                src = _SOURCE_CODES[parts[1]]
            except (ValueError, KeyError) as exc:
                raise ValueError(f"event log line {ln}: {exc}") from exc
            rows.append((t, src, z, la))
        required = ("lambda0", "horizon", "alpha", "beta_rev")
        missing = [k for k in required if k not in meta]
        if missing:
            raise ValueError(f"event log header missing {missing}")
        arr = np.array(rows, dtype=float).reshape(-1, 4)
        return EventLog(arr[:, 0], arr[:, 1].astype(np.int8), arr[:, 2], arr[:, 3],
                        lambda0=float(meta["lambda0"]), horizon=float(meta["horizon"]),
                        alpha=float(meta["alpha"]), beta_rev=float(meta["beta_rev"]))


@dataclass
class QPath:
    """Reference-measure path plus its Radon-Nikodym weight L_T."""
    log: EventLog
    likelihood: float


def _empty_log(params: ModelParams, seed) -> EventLog:
    return EventLog(np.empty(0), np.empty(0, dtype=np.int8), np.empty(0), np.empty(0),
                    lambda0=params.lambda0, horizon=params.horizon,
                    alpha=params.alpha, beta_rev=params.beta_rev, seed=seed)


def simulate_path(params: ModelParams, seed: int) -> EventLog:
    """Exact sample of the contagion process on [0, horizon] by thinning."""
    rng = derive_rng(seed, 0)
    T, beta, alpha = params.horizon, params.beta_rev, params.alpha
    rho = params.rho
    ell = params.excitation.of_scalar
    claim_dist, shock_dist = params.claim_dist, params.shock_dist

    t, lam = 0.0, params.lambda0
    times, sources, marks, lam_after = [], [], [], []
    while True:
        bound = max(lam, beta)
        e_claim = rng.exponential(1.0 / bound) if bound > 0 else math.inf
        e_shock = rng.exponential(1.0 / rho) if rho > 0 else math.inf
        dt = min(e_claim, e_shock)
        if not math.isfinite(dt) or t + dt > T:
            break
        t += dt
        lam = beta + (lam - beta) * math.exp(-alpha * dt)
        if e_shock < e_claim:
            z = float(shock_dist.sample(rng))
            lam += z
            times.append(t); sources.append(SHOCK); marks.append(z); lam_after.append(lam)
        else:
            # candidate claim: accept with probability lambda(t)/bound
            if rng.random() * bound <= lam:
                z = float(claim_dist.sample(rng))
                lam += ell(z)
                times.append(t); sources.append(CLAIM); marks.append(z); lam_after.append(lam)
    if not times:
        return _empty_log(params, seed)
    return EventLog(np.array(times), np.array(sources, dtype=np.int8),
                    np.array(marks), np.array(lam_after),
                    lambda0=params.lambda0, horizon=params.horizon,
                    alpha=params.alpha, beta_rev=params.beta_rev, seed=seed)


def log_likelihood(log: EventLog) -> float:
    """log L_T of a path: -int (lambda - 1) ds + sum over claims of log lambda_{t-}."""
    ll = -(log.integrated_lambda(0.0, log.horizon) - log.horizon)
    claim_times, _ = log.claims()
    for t in claim_times:
        ll += math.log(log.lambda_left(float(t)))
    return ll


def simulate_under_q(params: ModelParams, seed: int) -> QPath:
    """Reference-measure path: claims unit-rate Poisson, shocks Poisson(rho).

    The intensity is still reconstructed from the realized events via the
    contagion formula; the likelihood makes E_Q[L_T g] match physical-
    measure expectations of g.
    """
    rng = derive_rng(seed, 1)
    T = params.horizon
    n_claims = rng.poisson(T)
    n_shocks = rng.poisson(params.rho * T) if params.rho > 0 else 0
    t_claims = np.sort(rng.uniform(0.0, T, n_claims))
    t_shocks = np.sort(rng.uniform(0.0, T, n_shocks))
    z_claims = np.atleast_1d(params.claim_dist.sample(rng, n_claims)) if n_claims else np.empty(0)
    z_shocks = np.atleast_1d(params.shock_dist.sample(rng, n_shocks)) if n_shocks else np.empty(0)

    times = np.concatenate([t_claims, t_shocks])
    sources = np.concatenate([np.zeros(n_claims, dtype=np.int8),
                              np.ones(n_shocks, dtype=np.int8)])
    marks = np.concatenate([z_claims, z_shocks])
    order = np.argsort(times, kind="stable")
    times, sources, marks = times[order], sources[order], marks[order]

    lam = params.lambda0
    tprev = 0.0
    lam_after = np.empty_like(times)
    ell = params.excitation.of_scalar
    for i, (t, s, z) in enumerate(zip(times, sources, marks)):
        lam = params.beta_rev + (lam - params.beta_rev) * math.exp(-params.alpha * (t - tprev))
        lam += ell(z) if s == CLAIM else z
        lam_after[i] = lam
        tprev = t
    log = EventLog(times, sources, marks, lam_after,
                   lambda0=params.lambda0, horizon=T,
                   alpha=params.alpha, beta_rev=params.beta_rev, seed=seed)
    return QPath(log, math.exp(log_likelihood(log)))


def batch_simulate(n: int, params: ModelParams, seed: int, under_q: bool = False):
    """n independent paths from per-path seeds split off the master seed.

    The ensemble is identical for a given master seed regardless of the
    order in which paths are produced.
    """
    if n < 1:
        raise ValueError(f"need n >= 1 paths, got {n}")
    if under_q:
        return [simulate_under_q(params, _path_seed(seed, k)) for k in range(n)]
    return [simulate_path(params, _path_seed(seed, k)) for k in range(n)]


def batch_simulate_q(n: int, params: ModelParams, seed: int, cv_warn: float = 10.0):
    """n reference-measure paths; warns on heavy likelihood-weight degeneracy."""
    qpaths = batch_simulate(n, params, seed, under_q=True)
    w = np.array([qp.likelihood for qp in qpaths])
    m = w.mean()
    if m > 0 and w.std() / m > cv_warn:
        warnings.warn(
            f"likelihood weights are degenerate: CV = {w.std() / m:.2f} > {cv_warn:g}; "
            "consider a shorter horizon", RuntimeWarning)
    return qpaths


def _path_seed(master_seed: int, k: int) -> int:
    # stable per-path integer key; the actual stream split happens in derive_rng
    return master_seed * 1_000_003 + k


# ---------------------------------------------------------------------------
# wealth evaluation
# ---------------------------------------------------------------------------

def _annuity(r: float, t: float) -> float:
    """int_0^t e^{r s} ds = (e^{rt} - 1)/r, continuous at r = 0."""
    return t if r == 0.0 else math.expm1(r * t) / r


def wealth_path(log: EventLog, contract, strategy, filter_track, params: ModelParams,
                return_path: bool = False):
    """Terminal wealth under a reinsurance strategy along one claims path.

    strategy: either a constant control or a callable u(t, pi_left)
    evaluated with left-limit information only (predictability).
    filter_track: object with arrays ``times`` and ``pi_left`` used for the
    premium integral (trapezoid between claim times, where the filtered
    intensity is smooth); may be None only when the strategy is identically
    null reinsurance.

    Returns X_T, or (X_T, grid, wealth on the grid) when ``return_path`` is
    set.  Internally the discounted wealth is accumulated:
    X_t = e^{rt} (R0 + int_0^t e^{-rs}(c - q_s) ds - sum_{T_j <= t}
    e^{-r T_j} retained_j).
    """
    from . import contracts as _contracts

    T, r = params.horizon, params.rate_r
    c = params.insurance_premium_rate
    const_u = None if callable(strategy) else contract.check_control(strategy)
    claim_times, claim_marks = log.claims()

    null_strategy = const_u is not None and const_u == contract.u_null
    if null_strategy:
        grid = np.unique(np.concatenate([claim_times, [0.0, T]]))
        pi_grid = None
    else:
        if filter_track is None:
            raise ValueError("non-null strategies need a filter track for the premium")
        tt = np.asarray(filter_track.times, dtype=float)
        pi = np.asarray(filter_track.pi_left, dtype=float)
        grid = np.unique(np.concatenate([tt, claim_times, [0.0, T]]))
        grid = grid[(grid >= 0.0) & (grid <= T)]
        pi_grid = np.interp(grid, tt, pi)

    def control_at(i: int) -> float:
        if const_u is not None:
            return const_u
        return contract.check_control(strategy(float(grid[i]), float(pi_grid[i])))

    # discounted reinsurance premium integrand e^{-rs} q_s on the grid
    if null_strategy:
        q_cum = np.zeros_like(grid)
    else:
        q_disc = np.array([
            math.exp(-r * t) * _contracts.premium_rate(contract, control_at(i),
                                                       float(pi_grid[i]), params)
            for i, t in enumerate(grid)
        ])
        q_cum = np.concatenate(
            [[0.0], np.cumsum(0.5 * (q_disc[1:] + q_disc[:-1]) * np.diff(grid))])

    # retained claim outflows, discounted to time zero
    claim_idx = np.searchsorted(grid, claim_times)
    retained_disc = np.zeros_like(grid)
    for j, (t, z) in enumerate(zip(claim_times, claim_marks)):
        i = int(claim_idx[j])
        u = const_u if null_strategy else control_at(i)
        retained_disc[i] += math.exp(-r * t) * _contracts.retention(contract, float(z), u)

    disc_wealth = (params.initial_capital
                   + c * np.array([_annuity(-r, t) for t in grid])
                   - q_cum - np.cumsum(retained_disc))
    wealth = np.exp(r * grid) * disc_wealth
    x_T = float(wealth[-1])
    if return_path:
        return x_T, grid, wealth
    return x_T
