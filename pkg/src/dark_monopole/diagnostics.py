"""Checks a profile against the qualitative and asymptotic properties of
the minimizer: box bounds, monotonicity, tail and origin exponents, the
flux identity and the energy sandwich."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from .energy import Parameters, Profile
from .errors import WindowTooShort

MONOTONE_TOL = 1e-12
MIN_WINDOW = 8
# nodes next to r_max feel the truncation
TAIL_SKIP = 5
# decayed tail values below this are treated as noise by the fits
FIT_FLOOR = 1e-10
# relative distance from a bound treated as touching it
BOUND_BUDGET = 1e-3


class BoundCheck(str, enum.Enum):
    INSIDE = "INSIDE"
    ON_BOUNDARY = "ON_BOUNDARY"
    VIOLATED = "VIOLATED"


@dataclass(frozen=True)
class BoxMonotoneFlags:
    in_unit_box: bool
    u_monotone_decreasing: bool
    f_monotone_increasing: bool


def _strictly_inside(values) -> bool:
    return bool(np.all((values > 0.0) & (values < 1.0)))


def _monotone(values, decreasing: bool, tol=MONOTONE_TOL) -> bool:
    d = np.diff(values)
    if decreasing:
        d = -d
    # ties within tol are allowed node to node, but the whole run must move
    return bool(np.all(d >= -tol) and values.size > 1 and abs(values[-1] - values[0]) > tol)


def check_box_and_monotone(p: Profile, *, u_only: bool = False) -> BoxMonotoneFlags:
    """Interior nodes strictly inside (0, 1); u non-increasing, f
    non-decreasing, each with an overall change beyond the tie tolerance.

    ``u_only`` is for γ = ∞ profiles where f ≡ 1 carries no information.
    """
    u_in = _strictly_inside(p.u[1:-1])
    if u_only:
        return BoxMonotoneFlags(u_in, _monotone(p.u, True), True)
    return BoxMonotoneFlags(
        u_in and _strictly_inside(p.f[1:-1]),
        _monotone(p.u, True),
        _monotone(p.f, False),
    )


# --------------------------------------------------------------------------
# asymptotic fits


def tail_window(p: Profile, values=None) -> np.ndarray:
    """Node mask for the outer third of [r_min, r_max] minus the last nodes.

    With ``values`` given, the span is cut where they drop below FIT_FLOOR,
    so a decayed quantity is fitted where it still carries signal.
    """
    r = p.grid.nodes
    end = r[-1]
    if values is not None:
        live = np.flatnonzero(np.asarray(values) > FIT_FLOOR)
        end = r[live[-1]] if live.size else r[0]
    mask = (r >= r[0] + 2.0 * (end - r[0]) / 3.0) & (r <= end)
    mask[-TAIL_SKIP:] = False
    if values is not None:
        mask &= np.asarray(values) > FIT_FLOOR
    return mask


def origin_window(p: Profile) -> np.ndarray:
    """Node mask for the decade [10 r_min, 100 r_min], clear of the cutoff
    boundary layer at r_min."""
    r = p.grid.nodes
    return (r >= 10.0 * r[0]) & (r <= 100.0 * r[0])


def _require(mask, what):
    n = int(np.count_nonzero(mask))
    if n < MIN_WINDOW:
        raise WindowTooShort(f"{what}: {n} nodes in fit window, need {MIN_WINDOW}")


def fit_exponential_rate(r, values) -> float:
    """Rate k in values ≈ A r^p e^{-k r}; the power prefactor absorbs the
    algebraic corrections (e.g. the 1/r tail of f when γ = 0)."""
    design = np.column_stack((np.ones_like(r), np.log(r), -r))
    coef, *_ = np.linalg.lstsq(design, np.log(values), rcond=None)
    return float(coef[2])


def fit_power(r, values) -> float:
    """Slope of log(values) against log(r)."""
    slope, _ = np.polyfit(np.log(r), np.log(values), 1)
    return float(slope)


def fit_inverse_tail(r, values) -> float:
    """Limit c of values ≈ c + d/r."""
    design = np.column_stack((np.ones_like(r), 1.0 / r))
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    return float(coef[0])


@dataclass
class AsymptoticFit:
    u_tail_rate: float
    f_tail_rate: float | None
    f_tail_coefficient: float | None
    u_origin_power: float
    f_origin_power: float | None
    flux_integral: float | None


def fit_asymptotics(p: Profile, params: Parameters) -> AsymptoticFit:
    """Least-squares exponents on the tail and origin windows.

    For γ = ∞ the f-related fields are None.  For γ = 0 the f tail is
    algebraic, so the limit of r(1 - f) is reported instead of a rate; for
    γ > 0 the exponential rate of 1 - f is fitted.
    """
    r = p.grid.nodes
    tail = tail_window(p, p.u)
    _require(tail, "u tail")
    u_rate = fit_exponential_rate(r[tail], p.u[tail])

    origin = origin_window(p) & (p.u < 1.0)
    _require(origin, "u origin")
    u_power = fit_power(r[origin], 1.0 - p.u[origin])

    if params.infinite_gamma:
        return AsymptoticFit(u_rate, None, None, u_power, None, None)

    f_origin = origin_window(p) & (p.f > 0)
    _require(f_origin, "f origin")
    f_power = fit_power(r[f_origin], p.f[f_origin])
    flux = p.grid.integrate(params.beta * p.f * p.u ** 2)

    f_rate = coefficient = None
    if params.gamma > 0:
        g = 1.0 - p.f
        ftail = tail_window(p, g)
        _require(ftail, "f tail")
        f_rate = fit_exponential_rate(r[ftail], g[ftail])
    else:
        coefficient = fit_inverse_tail(r[tail_window(p)], (r * (1.0 - p.f))[tail_window(p)])
    return AsymptoticFit(u_rate, f_rate, coefficient, u_power, f_power, flux)


def predicted_f_tail_rate(params: Parameters) -> float:
    """√2 min(√γ, √(αβ)) for finite γ > 0."""
    return math.sqrt(2.0) * min(math.sqrt(params.gamma), math.sqrt(params.alpha * params.beta))


# --------------------------------------------------------------------------
# energy bounds


@dataclass(frozen=True)
class BoundResult:
    status: BoundCheck
    lower_margin: float
    upper_margin: float | None


def verify_energy_bounds(report, params: Parameters, budget: float = BOUND_BUDGET) -> BoundResult:
    """Classify ``report.total`` against its bounds.

    Margins are relative distances to each bound (positive means on the
    right side).  Within ``budget`` of a bound counts as ON_BOUNDARY.
    """
    e = report.total
    lower, upper = report.lower_bound, report.upper_bound
    lo = (e - lower) / lower
    hi = None if upper is None else (upper - e) / upper
    if lo < -budget or (hi is not None and hi < -budget):
        status = BoundCheck.VIOLATED
    elif lo <= budget or (hi is not None and hi <= budget):
        status = BoundCheck.ON_BOUNDARY
    else:
        status = BoundCheck.INSIDE
    return BoundResult(status, lo, hi)


# --------------------------------------------------------------------------
# full report


@dataclass
class DiagnosticsReport:
    in_unit_box: bool
    u_monotone_decreasing: bool
    f_monotone_increasing: bool
    u_tail_rate: float
    f_tail_rate: float | None
    f_tail_coefficient: float | None
    u_origin_power: float
    f_origin_power: float | None
    flux_integral: float | None
    bound_check: BoundCheck
    lower_margin: float
    upper_margin: float | None
    el_residual_norm: float
    predicted_u_tail_rate: float
    predicted_f_tail_rate: float | None
    predicted_f_origin_power: float | None

    def as_dict(self) -> dict:
        d = asdict(self)
        d["bound_check"] = self.bound_check.value
        return d


def run_diagnostics(p: Profile, params: Parameters, report=None) -> DiagnosticsReport:
    """Every check on one profile.  ``report`` defaults to a fresh
    EnergyReport of ``p``."""
    if report is None:
        if params.infinite_gamma:
            from .gamma_inf import build_report_gamma_inf
            report = build_report_gamma_inf(p.u, p.grid, params.alpha, params.beta)
        else:
            from .minimizer import build_report
            report = build_report(p, params)
    flags = check_box_and_monotone(p, u_only=params.infinite_gamma)
    fit = fit_asymptotics(p, params)
    bounds = verify_energy_bounds(report, params)
    finite = not params.infinite_gamma
    return DiagnosticsReport(
        in_unit_box=flags.in_unit_box,
        u_monotone_decreasing=flags.u_monotone_decreasing,
        f_monotone_increasing=flags.f_monotone_increasing,
        u_tail_rate=fit.u_tail_rate,
        f_tail_rate=fit.f_tail_rate,
        f_tail_coefficient=fit.f_tail_coefficient,
        u_origin_power=fit.u_origin_power,
        f_origin_power=fit.f_origin_power,
        flux_integral=fit.flux_integral,
        bound_check=bounds.status,
        lower_margin=bounds.lower_margin,
        upper_margin=bounds.upper_margin,
        el_residual_norm=report.el_residual_norm,
        predicted_u_tail_rate=params.tail_rate,
        predicted_f_tail_rate=predicted_f_tail_rate(params) if finite and params.gamma > 0 else None,
        predicted_f_origin_power=params.origin_power if finite else None,
    )
