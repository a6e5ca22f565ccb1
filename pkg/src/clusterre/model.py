"""Static model data and intensity kinematics for the contagion claims model.

The claims counting process has stochastic intensity that decays
exponentially at rate ``alpha`` toward the reversion level ``beta_rev``,
jumps by ``excitation(z)`` whenever a claim of size z is reported
(self-excitation) and by the shock mark itself whenever the external
Poisson(``rho``) shock process fires.  Everything downstream (simulation,
filtering, control) reads its coefficients from :class:`ModelParams`.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .distributions import MarkDistribution

__all__ = [
    "ExcitationSpec", "ModelParams", "IntensityState",
    "intensity_decay", "apply_claim_jump", "apply_external_jump",
    "validate_assumptions", "AssumptionReport",
    "default_params", "load_config", "dump_config", "parse_config_text",
]


@dataclass(frozen=True)
class ExcitationSpec:
    """Self-excitation map z -> jump of the intensity at a claim of size z.

    ``proportional``: ell(z) = a*z;  ``constant``: ell(z) = a.
    """
    kind: str
    a: float

    def __post_init__(self):
        if self.kind not in ("proportional", "constant"):
            raise ValueError(f"unknown excitation kind {self.kind!r}")
        if self.a < 0:
            raise ValueError(f"excitation coefficient must be >= 0, got {self.a}")

    def __call__(self, z):
        if self.kind == "proportional":
            return self.a * np.asarray(z, dtype=float)
        return self.a * np.ones_like(np.asarray(z, dtype=float))

    def of_scalar(self, z: float) -> float:
        return self.a * z if self.kind == "proportional" else self.a

    def moment(self, k: int, claim_dist: MarkDistribution) -> float:
        """E[ell(Z)^k] under the claim-size distribution."""
        if self.kind == "proportional":
            return self.a**k * claim_dist.moment(k)
        return self.a**k

    def exp_moment(self, s: float, claim_dist: MarkDistribution) -> float:
        """E[exp(s ell(Z))]; +inf when divergent."""
        if self.kind == "constant":
            return math.exp(s * self.a)
        if self.a == 0.0:
            return 1.0
        return claim_dist.exp_moment(s * self.a)


@dataclass(frozen=True)
class ModelParams:
    """All static coefficients of the contagion model, market and preferences.

    Units: alpha, beta_rev, lambda0, rho and the premium rates are per unit
    time; horizon is in time units; eta is in inverse wealth units.
    """
    alpha: float = 2.0
    beta_rev: float = 1.0
    lambda0: float = 1.5
    rho: float = 0.5
    claim_dist: MarkDistribution = field(default_factory=lambda: MarkDistribution.uniform(0.0, 1.0))
    shock_dist: MarkDistribution = field(default_factory=lambda: MarkDistribution.uniform(0.0, 1.0))
    excitation: ExcitationSpec = field(default_factory=lambda: ExcitationSpec("proportional", 0.5))
    horizon: float = 1.0
    rate_r: float = 0.05
    eta: float = 1.0
    initial_capital: float = 1.0
    insurance_premium_rate: float = 1.0
    safety_loading: float = 1.5

    def __post_init__(self):
        checks = [
            (self.alpha > 0, f"alpha must be > 0, got {self.alpha}"),
            # beta_rev = 0 is admitted for the shot-noise Cox reduction
            (self.beta_rev >= 0, f"beta_rev must be >= 0, got {self.beta_rev}"),
            (self.lambda0 > 0, f"lambda0 must be > 0, got {self.lambda0}"),
            (self.rho >= 0, f"rho must be >= 0, got {self.rho}"),
            (0 < self.horizon < math.inf, f"horizon must be finite and > 0, got {self.horizon}"),
            (self.rate_r >= 0, f"rate_r must be >= 0, got {self.rate_r}"),
            (self.eta > 0, f"eta must be > 0, got {self.eta}"),
            (self.initial_capital >= 0, f"initial_capital must be >= 0, got {self.initial_capital}"),
            (self.insurance_premium_rate >= 0,
             f"insurance_premium_rate must be >= 0, got {self.insurance_premium_rate}"),
            (self.safety_loading > 0, f"safety_loading must be > 0, got {self.safety_loading}"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)

    @property
    def beta_tilde(self) -> float:
        """Effective reversion level once the mean shock inflow is folded in."""
        return self.beta_rev + self.rho * self.shock_dist.mean() / self.alpha

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def to_config(self) -> dict:
        d = {
            "alpha": self.alpha,
            "beta_rev": self.beta_rev,
            "lambda0": self.lambda0,
            "rho": self.rho,
            "horizon": self.horizon,
            "rate_r": self.rate_r,
            "eta": self.eta,
            "initial_capital": self.initial_capital,
            "insurance_premium_rate": self.insurance_premium_rate,
            "safety_loading": self.safety_loading,
            "excitation_kind": self.excitation.kind,
            "excitation_a": self.excitation.a,
        }
        d.update(self.claim_dist.to_config("claim_dist"))
        d.update(self.shock_dist.to_config("shock_dist"))
        return d

    @staticmethod
    def from_config(cfg: dict) -> "ModelParams":
        base = default_params()
        floats = ["alpha", "beta_rev", "lambda0", "rho", "horizon", "rate_r",
                  "eta", "initial_capital", "insurance_premium_rate", "safety_loading"]
        kw = {k: float(cfg[k]) for k in floats if k in cfg}
        if "excitation_kind" in cfg or "excitation_a" in cfg:
            kw["excitation"] = ExcitationSpec(
                str(cfg.get("excitation_kind", base.excitation.kind)),
                float(cfg.get("excitation_a", base.excitation.a)))
        if any(k.startswith("claim_dist") for k in cfg):
            kw["claim_dist"] = MarkDistribution.from_config(cfg, "claim_dist")
        if any(k.startswith("shock_dist") for k in cfg):
            kw["shock_dist"] = MarkDistribution.from_config(cfg, "shock_dist")
        return replace(base, **kw)

    def content_hash(self) -> str:
        items = sorted((k, repr(v)) for k, v in self.to_config().items())
        payload = ";".join(f"{k}={v}" for k, v in items).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


def default_params() -> ModelParams:
    """Desk-scale defaults used across the docs and the validation suites."""
    return ModelParams()


# ---------------------------------------------------------------------------
# intensity kinematics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntensityState:
    """Current intensity value and the time it was last updated."""
    lam: float
    t_last: float = 0.0

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError(f"intensity must be positive, got {self.lam}")


def intensity_decay(state: IntensityState, dt: float, params: ModelParams) -> float:
    """Intensity after an event-free interval of length dt.

    Exponential relaxation toward the reversion level:
    beta + (lam - beta) * exp(-alpha * dt).
    """
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    b = params.beta_rev
    return b + (state.lam - b) * math.exp(-params.alpha * dt)


def apply_claim_jump(state: IntensityState, z: float, params: ModelParams) -> IntensityState:
    """Self-exciting jump: intensity increases by excitation(z) at a claim."""
    if z <= 0:
        raise ValueError(f"claim mark must be positive, got {z}")
    return IntensityState(state.lam + params.excitation.of_scalar(z), state.t_last)


def apply_external_jump(state: IntensityState, z: float) -> IntensityState:
    """Externally-excited jump: intensity increases by the shock mark itself."""
    if z <= 0:
        raise ValueError(f"shock mark must be positive, got {z}")
    return IntensityState(state.lam + z, state.t_last)


def decay_integral(lam: float, dt: float, params: ModelParams) -> float:
    """integral of the decayed intensity over an event-free interval.

    Closed form: beta*dt + (lam - beta) * (1 - exp(-alpha dt)) / alpha.
    """
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    b, al = params.beta_rev, params.alpha
    return b * dt + (lam - b) * -math.expm1(-al * dt) / al


# ---------------------------------------------------------------------------
# assumption validation
# ---------------------------------------------------------------------------

@dataclass
class AssumptionCheck:
    name: str
    subject: str
    exponent: float
    ok: bool
    detail: str


@dataclass
class AssumptionReport:
    checks: list

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.ok]

    def __str__(self):
        lines = []
        for c in self.checks:
            status = "pass" if c.ok else "FAIL"
            lines.append(f"[{status}] {c.name} / {c.subject} @ a={c.exponent:g}: {c.detail}")
        return "\n".join(lines)


def _moment_check(name, subject, dist: MarkDistribution, exponent) -> AssumptionCheck:
    ok = dist.has_exp_moment(exponent)
    if dist.bounded:
        detail = "bounded support, finite for every exponent"
    elif ok:
        detail = f"E[exp(aZ)] = {dist.exp_moment(exponent):.6g} (rate {dist.rate:g} > a)"
    else:
        detail = f"MGF diverges: exponent {exponent:g} >= rate {dist.rate:g}"
    return AssumptionCheck(name, subject, exponent, ok, detail)


def validate_assumptions(params: ModelParams, max_exponent: float) -> AssumptionReport:
    """Report on the exponential-moment conditions up to ``max_exponent``.

    Checks, in order: existence of some eps > 0 with finite
    E[exp(eps ell(Z1))] and E[exp(eps Z2)] (needed for the measure change),
    then finiteness of E[exp(a ell(Z1))], E[exp(a Z1)], E[exp(a Z2)] at
    a = max_exponent, which must cover every exponent the configured
    experiment uses.  Report-only: nothing is raised.
    """
    checks = []
    cd, sd, ex = params.claim_dist, params.shock_dist, params.excitation

    # some-eps condition: all supported families admit one
    eps_ok_claim = ex.kind == "constant" or ex.a == 0.0 or cd.bounded or cd.rate > 0
    checks.append(AssumptionCheck(
        "measure-change eps", "excitation(Z1)", 0.0, eps_ok_claim,
        "some eps > 0 with finite E[exp(eps ell(Z1))] exists"))
    checks.append(AssumptionCheck(
        "measure-change eps", "Z2", 0.0, sd.bounded or sd.rate > 0,
        "some eps > 0 with finite E[exp(eps Z2)] exists"))

    a = float(max_exponent)
    if ex.kind == "constant" or ex.a == 0.0:
        checks.append(AssumptionCheck(
            "exponential moment", "excitation(Z1)", a, True,
            "constant excitation, finite for every exponent"))
    else:
        checks.append(_moment_check("exponential moment", "excitation(Z1)", cd, a * ex.a))
    checks.append(_moment_check("exponential moment", "Z1", cd, a))
    checks.append(_moment_check("exponential moment", "Z2", sd, a))
    return AssumptionReport(checks)


# ---------------------------------------------------------------------------
# flat key=value config files
# ---------------------------------------------------------------------------

CONFIG_HEADER = """\
# clusterre model configuration (flat key = value).
# Rates (alpha, beta_rev, lambda0, rho, premium rates) are per unit time;
# horizon is in time units; eta is inverse wealth; marks are wealth units.
"""


def parse_config_text(text: str) -> dict:
    cfg = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {ln}: expected 'key = value', got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ValueError(f"config line {ln}: empty key")
        cfg[key] = val
    return cfg


def load_config(path) -> ModelParams:
    with open(path, "r", encoding="utf-8") as fh:
        return ModelParams.from_config(parse_config_text(fh.read()))


def dump_config(params: ModelParams, path=None) -> str:
    lines = [CONFIG_HEADER]
    for k, v in params.to_config().items():
        lines.append(f"{k} = {v}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
