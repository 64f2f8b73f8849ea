"""Energy report shared by the two-field and γ=∞ solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .bps import energy_lower_bound, nonbps_upper_bound
from .energy import EnergyBreakdown, Parameters

LN2 = math.log(2.0)


def energy_bounds(params: Parameters):
    """(lower, upper) energy bounds known for these couplings.

    γ = 0 gets the BPS sandwich, γ = ∞ the trial-profile bounds.  For finite
    γ > 0 only the lower bound obtained by dropping the Higgs term holds, so
    ``upper`` is None (partial coverage).
    """
    a, b = params.alpha, params.beta
    if params.infinite_gamma:
        s = math.sqrt(2.0 * a * b)
        return s, math.sqrt(2.0 * a * b * (1.0 + 4.0 * LN2))
    lower = energy_lower_bound(a, b)
    if params.gamma == 0:
        return lower, nonbps_upper_bound(a, b)
    return lower, None


@dataclass
class EnergyReport:
    breakdown: EnergyBreakdown
    lower_bound: float
    upper_bound: float | None
    el_residual_norm: float
    grad_norm: float
    monotone_u: bool
    monotone_f: bool
    in_unit_box: bool
    notes: list[str] = field(default_factory=list)

    @property
    def total(self) -> float:
        return self.breakdown.total

    def as_dict(self) -> dict:
        d = self.breakdown.as_dict()
        d.update(
            lower_bound=self.lower_bound,
            upper_bound=self.upper_bound,
            el_residual_norm=self.el_residual_norm,
            grad_norm=self.grad_norm,
            monotone_u=self.monotone_u,
            monotone_f=self.monotone_f,
            in_unit_box=self.in_unit_box,
        )
        if self.notes:
            d["notes"] = list(self.notes)
        return d
