"""The γ = ∞ problem: f frozen at 1, one field u minimizing

    I(u) = ∫ 2u'² + (1 - u²)²/r² + αβ u² dr,   u(0) = 1, u(∞) = 0,

plus the trial-profile bounds, the scaling (virial) partition, a uniqueness
cross-check and the Georgi–Glashow energy C(ε).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bps import bps_values
from .diagnostics import check_box_and_monotone
from .energy import (
    EnergyBreakdown,
    Parameters,
    Profile,
    discrete_residual,
    energy,
    energy_gradient,
    energy_hessian,
)
from .errors import InvalidParameters, NonConvergence
from .grid import RadialGrid, build_grid, extend_inward
from .minimizer import (
    CONTINUATION_DRIFT,
    InitKind,
    SolveConfig,
    _minimize,
    _projected,
    default_r_max,
    solve,
)
from .report import EnergyReport, energy_bounds

LN2 = math.log(2.0)


def _params(alpha, beta) -> Parameters:
    # the u-only functional is the γ = 0 functional evaluated at f ≡ 1
    return Parameters(alpha, beta, 0.0)


def _as_profile(u, grid) -> Profile:
    return Profile(u, np.ones(grid.n), grid)


class _OneField:
    bands = (1, 1)

    def __init__(self, grid: RadialGrid, alpha: float, beta: float):
        self.grid = grid
        self.params = _params(alpha, beta)
        self.mass = grid.weights[1:]
        self._f = np.ones(grid.n)

    def unpack(self, x) -> Profile:
        u = np.empty(self.grid.n)
        u[0] = 1.0
        u[1:] = x
        return Profile(u, self._f, self.grid)

    def pack(self, p: Profile) -> np.ndarray:
        return p.u[1:].copy()

    def value(self, x) -> float:
        return energy_gamma_inf(self.unpack(x).u, self.grid, *self._ab).total

    @property
    def _ab(self):
        return self.params.alpha, self.params.beta

    def gradient(self, x) -> np.ndarray:
        return energy_gradient(self.unpack(x), self.params)[0][1:]

    def residual_norm(self, x) -> float:
        return float(np.abs(discrete_residual(self.unpack(x), self.params)[0]).max())

    def hessian(self, x):
        d, o, *_ = energy_hessian(self.unpack(x), self.params)
        d, o = d[1:], o[1:]
        ab = np.zeros((3, len(d)))
        ab[0, 1:], ab[1], ab[2, :-1] = o, d, o
        return ab

    def preconditioner(self, x):
        ab = self.hessian(x)
        stiff = -np.concatenate((ab[0, 1:], [0.0])) - np.concatenate(([0.0], ab[0, 1:]))
        stiff[0] += 4.0 / self.grid.gaps[0]
        ab[1] = stiff + np.abs(ab[1] - stiff)
        return ab


@dataclass
class GammaInfSolution:
    u: np.ndarray
    grid: RadialGrid
    energy: float
    virial_gap: float
    bounds: tuple
    converged: bool = False
    iterations: int = 0
    history: list[float] = field(default_factory=list)
    report: EnergyReport | None = None

    @property
    def profile(self) -> Profile:
        return _as_profile(self.u, self.grid)


def energy_gamma_inf(u, grid: RadialGrid, alpha: float, beta: float) -> EnergyBreakdown:
    """Breakdown with f ≡ 1: term_cross holds ∫αβu², f terms are zero.

    The core [0, r_min], where u = 1, contributes αβ r_min to the mass term;
    without it the energy would not be that of an admissible profile and
    would drift upward as r_min shrinks.
    """
    e = energy(_as_profile(u, grid), _params(alpha, beta))
    return replace(e, term_cross=e.term_cross + alpha * beta * grid.r_min)


def build_report_gamma_inf(u, grid: RadialGrid, alpha: float, beta: float) -> EnergyReport:
    p = _as_profile(u, grid)
    params = _params(alpha, beta)
    gu, _ = energy_gradient(p, params)
    ru, _ = discrete_residual(p, params)
    flags = check_box_and_monotone(p, u_only=True)
    lower, upper = energy_bounds(Parameters(alpha, beta, math.inf))
    return EnergyReport(
        breakdown=energy_gamma_inf(u, grid, alpha, beta),
        lower_bound=lower,
        upper_bound=upper,
        el_residual_norm=float(np.abs(ru).max()),
        grad_norm=float(np.abs(_projected(p.u[1:], gu[1:])).max()),
        monotone_u=flags.u_monotone_decreasing,
        monotone_f=True,
        in_unit_box=flags.in_unit_box,
        notes=["gamma = inf: f is identically 1"],
    )


def virial_gap(u, grid: RadialGrid, alpha: float, beta: float) -> float:
    """|∫2u'² + (1-u²)²/r² - ∫αβu²| / I(u); zero for an exact solution."""
    e = energy_gamma_inf(u, grid, alpha, beta)
    kinetic = e.term_u_grad + e.term_u_pot
    return abs(kinetic - e.term_cross) / e.total


def trial_integrals(a: float, alpha: float, beta: float):
    """Closed-form pieces of I(e^{-ar}): (∫2u'², ∫(1-u²)²/r², ∫αβu²)
    = (a, 4a ln 2, αβ/(2a))."""
    if not a > 0:
        raise InvalidParameters(f"trial rate must be positive, got {a}")
    return a, 4.0 * a * LN2, alpha * beta / (2.0 * a)


def trial_energy(a: float, alpha: float, beta: float) -> float:
    """F(a) = I(e^{-ar}) = a(1 + 4 ln 2) + αβ/(2a)."""
    return sum(trial_integrals(a, alpha, beta))


def optimal_trial_rate(alpha: float, beta: float) -> float:
    return math.sqrt(alpha * beta / (2.0 * (1.0 + 4.0 * LN2)))


def trial_virial_gap(a: float, alpha: float, beta: float) -> float:
    grad, pot, mass = trial_integrals(a, alpha, beta)
    return abs(grad + pot - mass) / (grad + pot + mass)


def energy_bounds_gamma_inf(alpha: float, beta: float):
    """(√(2αβ), √(2αβ)(1 + 2 ln 2), √(2αβ(1 + 4 ln 2)))."""
    s = math.sqrt(2.0 * alpha * beta)
    return s, s * (1.0 + 2.0 * LN2), math.sqrt(2.0 * alpha * beta * (1.0 + 4.0 * LN2))


def initial_guess_gamma_inf(kind, alpha, beta, grid: RadialGrid, source: Profile | None = None):
    kind = InitKind(kind)
    r = grid.nodes
    kappa = math.sqrt(alpha * beta / 2.0)
    if kind is InitKind.BPS:
        u, _ = bps_values(kappa ** 2, r)
    elif kind is InitKind.LINEAR:
        u = 1.0 - (r - grid.r_min) / (grid.r_max - grid.r_min)
    elif kind is InitKind.EXPONENTIAL:
        u = np.exp(-kappa * r)
    else:
        if source is None:
            raise InvalidParameters("init=file needs a source profile")
        u = np.clip(np.interp(r, source.grid.nodes, source.u), 0.0, 1.0)
    u = np.array(u, dtype=float)
    u[0] = 1.0
    return u


def _extend(u_old, old_grid: RadialGrid, grid: RadialGrid):
    k = grid.n - old_grid.n
    r = grid.nodes
    u = np.concatenate((np.ones(k), u_old))
    c = (1.0 - u_old[1]) / old_grid.nodes[1] ** 2
    u[: k + 1] = 1.0 - c * r[: k + 1] ** 2
    u[0] = 1.0
    return u


def solve_gamma_inf(alpha: float, beta: float, cfg: SolveConfig | None = None, *,
                    raise_on_failure: bool = False) -> GammaInfSolution:
    """Minimize I(u) with the same continuation/descent/Newton scheme as the
    two-field solver."""
    cfg = cfg or SolveConfig()
    params = Parameters(alpha, beta, math.inf)
    r_max = cfg.r_max if cfg.r_max is not None else default_r_max(params)
    grid = build_grid(cfg.r_min, r_max, cfg.n_nodes, cfg.ratio)
    u = initial_guess_gamma_inf(cfg.init, alpha, beta, grid, cfg.init_profile)

    history = []
    iterations = 0
    ok = False
    for k in range(cfg.continuation_steps):
        if k > 0:
            new_grid = extend_inward(grid, cfg.r_min * 2.0 ** -k)
            powered = _extend(u, grid, new_grid)
            padded = np.concatenate((np.ones(new_grid.n - grid.n), u))
            if (energy_gamma_inf(padded, new_grid, alpha, beta).total
                    < energy_gamma_inf(powered, new_grid, alpha, beta).total):
                powered = padded
            grid, u = new_grid, powered
        prob = _OneField(grid, alpha, beta)
        x, used, ok = _minimize(prob, prob.pack(_as_profile(u, grid)), cfg)
        iterations += used
        u = prob.unpack(x).u
        history.append(energy_gamma_inf(u, grid, alpha, beta).total)

    if len(history) >= 2 and abs(history[-1] - history[-2]) > CONTINUATION_DRIFT * abs(history[-2]):
        ok = False
    lower, _, upper = energy_bounds_gamma_inf(alpha, beta)
    report = build_report_gamma_inf(u, grid, alpha, beta)
    result = GammaInfSolution(
        u=u, grid=grid, energy=report.total,
        virial_gap=virial_gap(u, grid, alpha, beta),
        bounds=(lower, upper), converged=ok, iterations=iterations,
        history=history, report=report,
    )
    if raise_on_failure and not ok:
        raise NonConvergence("tolerances not met", partial=result)
    return result


@dataclass(frozen=True)
class UniquenessCheck:
    distance: float
    energy_exponential: float
    energy_linear: float

    @property
    def energy_mismatch(self) -> float:
        return abs(self.energy_exponential - self.energy_linear) / self.energy_linear


def uniqueness_cross_check(alpha: float, beta: float, cfg: SolveConfig | None = None) -> UniquenessCheck:
    """Solve from an exponential and from a linear start; the sup-norm
    distance between the two minimizers should vanish."""
    cfg = cfg or SolveConfig()
    runs = {}
    for kind in (InitKind.EXPONENTIAL, InitKind.LINEAR):
        c = SolveConfig(**{**cfg.as_dict(), "init": kind})
        runs[kind] = solve_gamma_inf(alpha, beta, c, raise_on_failure=True)
    a, b = runs[InitKind.EXPONENTIAL], runs[InitKind.LINEAR]
    return UniquenessCheck(float(np.abs(a.u - b.u).max()), a.energy, b.energy)


def georgi_glashow_C(epsilon: float, cfg: SolveConfig | None = None) -> float:
    """C(ε) = I/2 at (α, β, γ) = (1, 2, ε²/2); ε = inf uses the u-only problem."""
    if math.isnan(epsilon) or epsilon < 0:
        raise InvalidParameters(f"epsilon must be >= 0 or inf, got {epsilon}")
    if math.isinf(epsilon):
        return 0.5 * solve_gamma_inf(1.0, 2.0, cfg, raise_on_failure=True).energy
    params = Parameters(1.0, 2.0, 0.5 * epsilon ** 2)
    return 0.5 * solve(params, cfg, raise_on_failure=True).report.total
