"""Reinsurance contracts: retention functions and expected-value premia.

Three contract families are supported, each driven by a scalar retention
parameter u (larger u = less protection, u_N = null reinsurance):

* proportional:      retained = u*z,            u in [0, 1];
* excess_of_loss:    retained = min(u, z),      u in [0, +inf];
* limited_stop_loss: retained = z - (z-u)^+ + (z-u-b)^+ for a fixed
  coverage width b > 0 (the reinsurer pays at most b per claim),
  u in [0, +inf].

The premium follows the expected value principle: rate = (1 + safety
loading) times the filtered claim intensity times the expected ceded loss
per claim.  Null reinsurance always costs zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams

__all__ = ["Contract", "retention", "premium_rate", "ceded_mean"]

KINDS = ("proportional", "excess_of_loss", "limited_stop_loss")


@dataclass(frozen=True)
class Contract:
    kind: str
    coverage: float = math.inf  # limited_stop_loss width b; unused otherwise

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown contract kind {self.kind!r}")
        if self.kind == "limited_stop_loss":
            if not (self.coverage > 0 and math.isfinite(self.coverage)):
                raise ValueError(f"limited_stop_loss needs finite coverage > 0, got {self.coverage}")

    @property
    def u_max_protection(self) -> float:
        return 0.0

    @property
    def u_null(self) -> float:
        return 1.0 if self.kind == "proportional" else math.inf

    def contains(self, u: float) -> bool:
        if not u >= 0:
            return False
        if self.kind == "proportional":
            return u <= 1.0
        return True  # [0, +inf], inf = null-reinsurance sentinel

    def check_control(self, u: float) -> float:
        if not self.contains(u):
            raise ValueError(f"control {u!r} outside the {self.kind} domain")
        return float(u)

    def search_upper(self, params: ModelParams) -> float:
        """Finite search bound: beyond the claim support the objective is flat."""
        if self.kind == "proportional":
            return 1.0
        return params.claim_dist.effective_upper()

    def describe(self) -> str:
        if self.kind == "limited_stop_loss":
            return f"limited_stop_loss(b={self.coverage:g})"
        return self.kind


def retention(contract: Contract, z, u: float):
    """Loss kept by the insurer on a claim of size z under control u."""
    u = contract.check_control(u)
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError("claim sizes must be positive")
    if contract.kind == "proportional":
        out = u * z
    elif contract.kind == "excess_of_loss":
        out = np.minimum(u, z)
    else:
        b = contract.coverage
        out = z - np.maximum(z - u, 0.0) + np.maximum(z - u - b, 0.0)
    return out if out.ndim else float(out)


def ceded_mean(contract: Contract, u: float, params: ModelParams) -> float:
    """E[Z - retention(Z, u)]: expected loss per claim carried by the reinsurer."""
    u = contract.check_control(u)
    dist = params.claim_dist
    if contract.kind == "proportional":
        return (1.0 - u) * dist.mean()
    # excess-type ceded loss is (z-u)^+ (minus (z-u-b)^+ when capped), and
    # E[(Z-x)^+] = E[Z 1{Z>x}] - x P(Z>x)
    def excess_mean(x):
        if math.isinf(x):
            return 0.0
        return dist.x_exp_tail(0.0, x) - x * dist.exp_tail(0.0, x)
    if contract.kind == "excess_of_loss":
        return excess_mean(u)
    return excess_mean(u) - excess_mean(u + contract.coverage)


def premium_rate(contract: Contract, u: float, pi_lambda: float, params: ModelParams) -> float:
    """Reinsurance premium rate under the expected value principle.

    (1 + safety_loading) * pi_lambda * E[Z - retention(Z, u)]; zero at null
    reinsurance, maximal at full protection.
    """
    if pi_lambda <= 0:
        raise ValueError(f"filtered intensity must be positive, got {pi_lambda}")
    return (1.0 + params.safety_loading) * pi_lambda * ceded_mean(contract, u, params)
