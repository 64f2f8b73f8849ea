"""Energy minimization for finite γ.

The inner cutoff r_min is halved over ``continuation_steps`` solves.  Each
solve runs a projected, preconditioned gradient descent with Armijo
backtracking (robust far from the minimizer) and then damped Newton on the
discrete Euler–Lagrange system, whose Jacobian is block tridiagonal with 2x2
blocks (u_i, f_i).
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .bps import bps_profile
from .diagnostics import check_box_and_monotone
from .energy import (
    Parameters,
    Profile,
    discrete_residual,
    energy,
    energy_gradient,
    energy_hessian,
)
from .errors import InvalidParameters, NonConvergence, SingularJacobian
from .grid import RadialGrid, build_grid, extend_inward
from .report import EnergyReport, energy_bounds

log = logging.getLogger(__name__)

ARMIJO_C1 = 1e-4
# descent hands over to Newton once its steps are this small (sup norm)
NEWTON_SWITCH = 1e-3
MIN_STEP = 2.0 ** -30
# relative energy change allowed between the last two continuation steps
CONTINUATION_DRIFT = 5e-3


class InitKind(str, enum.Enum):
    BPS = "bps"
    LINEAR = "linear"
    EXPONENTIAL = "exponential"
    FROM_FILE = "file"


@dataclass
class SolveConfig:
    continuation_steps: int = 3
    n_nodes: int = 4001
    ratio: float = 1.002
    r_min: float = 1e-3
    r_max: float | None = None
    grad_tol: float = 1e-8
    newton_tol: float = 1e-5
    max_iters: int = 500
    init: InitKind = InitKind.BPS
    init_profile: Profile | None = None

    def __post_init__(self):
        self.init = InitKind(self.init)
        if int(self.continuation_steps) != self.continuation_steps or self.continuation_steps < 1:
            raise InvalidParameters("continuation_steps must be an integer >= 1")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise InvalidParameters("max_iters must be an integer >= 1")
        if not (self.grad_tol > 0 and self.newton_tol > 0):
            raise InvalidParameters("tolerances must be positive")
        if not self.r_min > 0:
            raise InvalidParameters(f"r_min must be positive, got {self.r_min}")
        if self.r_max is not None and not self.r_max > self.r_min:
            raise InvalidParameters("r_max must exceed r_min")
        if self.init is InitKind.FROM_FILE and self.init_profile is None:
            raise InvalidParameters("init=file needs init_profile")

    def as_dict(self) -> dict:
        return {
            "continuation_steps": self.continuation_steps,
            "n_nodes": self.n_nodes,
            "ratio": self.ratio,
            "r_min": self.r_min,
            "r_max": self.r_max,
            "grad_tol": self.grad_tol,
            "newton_tol": self.newton_tol,
            "max_iters": self.max_iters,
            "init": self.init.value,
        }


@dataclass
class SolvedProfile:
    profile: Profile
    report: EnergyReport
    converged: bool
    iterations: int
    history: list[float] = field(default_factory=list)
    params: Parameters | None = None


def default_r_max(params: Parameters) -> float:
    """Outer radius with e^{-κ r_max} <= e^{-12}."""
    return max(20.0, 12.0 / params.tail_rate)


# --------------------------------------------------------------------------
# problem adapters: map between nodal profiles and the free-variable vector


class _TwoField:
    bands = (2, 2)

    def __init__(self, grid: RadialGrid, params: Parameters):
        self.grid = grid
        self.params = params
        self.mass = np.repeat(grid.weights[1:], 2)

    def unpack(self, x) -> Profile:
        n = self.grid.n
        u = np.empty(n)
        f = np.empty(n)
        u[0], f[0] = 1.0, 0.0
        u[1:], f[1:] = x[0::2], x[1::2]
        return Profile(u, f, self.grid)

    def pack(self, p: Profile) -> np.ndarray:
        x = np.empty(2 * (self.grid.n - 1))
        x[0::2], x[1::2] = p.u[1:], p.f[1:]
        return x

    def value(self, x) -> float:
        return energy(self.unpack(x), self.params).total

    def gradient(self, x) -> np.ndarray:
        gu, gf = energy_gradient(self.unpack(x), self.params)
        g = np.empty_like(x)
        g[0::2], g[1::2] = gu[1:], gf[1:]
        return g

    def residual_norm(self, x) -> float:
        ru, rf = discrete_residual(self.unpack(x), self.params)
        return float(max(np.abs(ru).max(), np.abs(rf).max()))

    def _blocks(self, x):
        uu_d, uu_o, ff_d, ff_o, uf = energy_hessian(self.unpack(x), self.params)
        return uu_d[1:], uu_o[1:], ff_d[1:], ff_o[1:], uf[1:]

    @staticmethod
    def _assemble(uu_d, uu_o, ff_d, ff_o, uf):
        n = 2 * len(uu_d)
        ab = np.zeros((5, n))
        ab[2, 0::2], ab[2, 1::2] = uu_d, ff_d
        ab[1, 1::2] = uf
        ab[3, 0::2] = uf
        ab[0, 2::2], ab[0, 3::2] = uu_o, ff_o
        ab[4, 0:-2:2], ab[4, 1:-2:2] = uu_o, ff_o
        return ab

    def hessian(self, x):
        return self._assemble(*self._blocks(x))

    def preconditioner(self, x):
        uu_d, uu_o, ff_d, ff_o, uf = self._blocks(x)
        # stiffness part plus absolute local curvature; drops the u-f coupling
        # but absorbs it into the diagonal, so the matrix is SPD
        stiff_u = -np.concatenate((uu_o, [0.0])) - np.concatenate(([0.0], uu_o))
        stiff_f = -np.concatenate((ff_o, [0.0])) - np.concatenate(([0.0], ff_o))
        stiff_u[0] += 4.0 / self.grid.gaps[0]
        stiff_f[0] += 2.0 * self.params.alpha * self.grid.nodes[0] * self.grid.nodes[1] / self.grid.gaps[0]
        pu = stiff_u + np.abs(uu_d - stiff_u) + np.abs(uf)
        pf = stiff_f + np.abs(ff_d - stiff_f) + np.abs(uf)
        return self._assemble(pu, uu_o, pf, ff_o, np.zeros_like(uf))


# --------------------------------------------------------------------------
# generic iterations


def _projected(x, g):
    pg = g.copy()
    pg[(x <= 0.0) & (g > 0)] = 0.0
    pg[(x >= 1.0) & (g < 0)] = 0.0
    return pg


def _converged(prob, x, g, cfg) -> bool:
    if np.abs(_projected(x, g)).max() > cfg.grad_tol:
        return False
    return prob.residual_norm(x) <= cfg.newton_tol


def _descent(prob, x, cfg, max_iters):
    """Projected preconditioned descent; every accepted step satisfies Armijo."""
    e = prob.value(x)
    g = prob.gradient(x)
    it = 0
    for it in range(1, max_iters + 1):
        d = -solve_banded(prob.bands, prob.preconditioner(x), g)
        t = 1.0
        while True:
            xn = np.clip(x + t * d, 0.0, 1.0)
            en = prob.value(xn)
            if en <= e + ARMIJO_C1 * g.dot(xn - x):
                break
            t *= 0.5
            if t < MIN_STEP:
                return x, it, False
        step = np.abs(xn - x).max()
        x, e = xn, en
        g = prob.gradient(x)
        if step < NEWTON_SWITCH or step == 0.0:
            break
    return x, it, True


def _merit(prob, g) -> float:
    return float(np.sqrt(np.sum(g * g / prob.mass)))


def _newton(prob, x, cfg, max_iters):
    """Damped Newton on the discrete EL system; halves the step until the
    mass-weighted residual norm drops."""
    g = prob.gradient(x)
    m = _merit(prob, g)
    for it in range(max_iters):
        if _converged(prob, x, g, cfg):
            return x, it, True
        try:
            dx = solve_banded(prob.bands, prob.hessian(x), -g)
        except (LinAlgError, ValueError) as exc:
            raise SingularJacobian(str(exc)) from exc
        if not np.all(np.isfinite(dx)):
            raise SingularJacobian("non-finite Newton step")
        t = 1.0
        while t >= MIN_STEP:
            xn = np.clip(x + t * dx, 0.0, 1.0)
            gn = prob.gradient(xn)
            mn = _merit(prob, gn)
            if mn < m:
                break
            t *= 0.5
        else:
            return x, it, _converged(prob, x, g, cfg)
        x, g, m = xn, gn, mn
    return x, max_iters, _converged(prob, x, g, cfg)


def _minimize(prob, x, cfg):
    """Descent, then Newton; falls back to more descent if Newton stalls."""
    used = 0
    while used < cfg.max_iters:
        x, n_desc, _ = _descent(prob, x, cfg, cfg.max_iters - used)
        used += n_desc
        try:
            x, n_newton, ok = _newton(prob, x, cfg, min(50, cfg.max_iters - used + 1))
        except SingularJacobian:
            log.debug("singular Newton system; continuing with descent")
            n_newton, ok = 1, False
        used += n_newton
        if ok:
            return x, used, True
        if n_desc == 0 and n_newton == 0:
            break
    return x, used, _converged(prob, x, prob.gradient(x), cfg)


# --------------------------------------------------------------------------
# public operations


def _boundary_correct(u, f):
    u[0], f[0] = 1.0, 0.0
    return u, f


def initial_guess(kind, params: Parameters, grid: RadialGrid, source: Profile | None = None) -> Profile:
    kind = InitKind(kind)
    r = grid.nodes
    if kind is InitKind.BPS:
        p = bps_profile(params.alpha, grid)
        u, f = p.u.copy(), p.f.copy()
    elif kind is InitKind.LINEAR:
        s = (r - grid.r_min) / (grid.r_max - grid.r_min)
        u, f = 1.0 - s, s.copy()
    elif kind is InitKind.EXPONENTIAL:
        u = np.exp(-params.tail_rate * r)
        f = 1.0 - np.exp(-r)
    else:
        if source is None:
            raise InvalidParameters("init=file needs a source profile")
        u = np.interp(r, source.grid.nodes, source.u)
        f = np.interp(r, source.grid.nodes, source.f)
        u, f = np.clip(u, 0.0, 1.0), np.clip(f, 0.0, 1.0)
    return Profile(*_boundary_correct(u, f), grid)


def project_box(p: Profile) -> Profile:
    """Clamp nodal values into [0, 1]; the r_min values are left alone."""
    u, f = p.u.copy(), p.f.copy()
    u[1:] = np.clip(u[1:], 0.0, 1.0)
    f[1:] = np.clip(f[1:], 0.0, 1.0)
    return Profile(u, f, p.grid)


def _check_inner_boundary(p: Profile, tol=1e-3):
    if abs(p.u[0] - 1.0) > tol or abs(p.f[0]) > tol:
        raise InvalidParameters(
            f"profile violates u(r_min)=1, f(r_min)=0 (got u={p.u[0]}, f={p.f[0]})")


def newton_refine(p: Profile, params: Parameters, cfg: SolveConfig | None = None) -> Profile:
    """Newton iterations from a nearby profile.

    The inner boundary values are snapped to (1, 0) after checking they are
    within 1e-3 of them.  Raises NonConvergence (with ``partial``) if the
    residual tolerance is not met, SingularJacobian if the system cannot be
    solved.
    """
    cfg = cfg or SolveConfig()
    if params.infinite_gamma:
        raise InvalidParameters("gamma = inf: use gamma_inf.solve_gamma_inf")
    _check_inner_boundary(p)
    prob = _TwoField(p.grid, params)
    x = prob.pack(p)
    try:
        x, iters, ok = _newton(prob, x, cfg, cfg.max_iters)
    except SingularJacobian as exc:
        exc.partial = p
        raise
    out = prob.unpack(x)
    if not ok:
        raise NonConvergence(f"Newton stopped after {iters} iterations", partial=out)
    log.debug("newton_refine converged in %d iterations", iters)
    return out


def extend_profile(p: Profile, grid: RadialGrid, params: Parameters, value=None) -> Profile:
    """Carry a solution onto a grid that reaches further in.

    Old nodes keep their values; the newly exposed region (and the old r_min
    node) follow 1 - u ~ C r², f ~ C r^σ matched at the old first free node.
    If that warm start has higher energy than padding with (1, 0), the
    padding is used instead.
    """
    k = grid.n - p.grid.n
    if k <= 0 or not np.array_equal(grid.nodes[k:], p.grid.nodes):
        raise InvalidParameters("target grid must extend the source grid inward")
    r = grid.nodes
    u = np.concatenate((np.ones(k), p.u))
    f = np.concatenate((np.zeros(k), p.f))
    padded = Profile(u.copy(), f.copy(), grid)

    r1 = p.grid.nodes[1]
    cu = (1.0 - p.u[1]) / r1 ** 2
    cf = p.f[1] / r1 ** params.origin_power
    u[: k + 1] = 1.0 - cu * r[: k + 1] ** 2
    f[: k + 1] = cf * r[: k + 1] ** params.origin_power
    powered = Profile(*_boundary_correct(u, f), grid)
    if value is None:
        return powered
    return powered if value(powered) <= value(padded) else padded


def build_report(p: Profile, params: Parameters) -> EnergyReport:
    gu, gf = energy_gradient(p, params)
    x = np.concatenate((p.u[1:], p.f[1:]))
    g = np.concatenate((gu[1:], gf[1:]))
    ru, rf = discrete_residual(p, params)
    flags = check_box_and_monotone(p)
    lower, upper = energy_bounds(params)
    notes = []
    if upper is None:
        notes.append("partial coverage: no upper energy bound is known for 0 < gamma < inf")
    return EnergyReport(
        breakdown=energy(p, params),
        lower_bound=lower,
        upper_bound=upper,
        el_residual_norm=float(max(np.abs(ru).max(), np.abs(rf).max())),
        grad_norm=float(np.abs(_projected(x, g)).max()),
        monotone_u=flags.u_monotone_decreasing,
        monotone_f=flags.f_monotone_increasing,
        in_unit_box=flags.in_unit_box,
        notes=notes,
    )


def solve(params: Parameters, cfg: SolveConfig | None = None, *,
          raise_on_failure: bool = False) -> SolvedProfile:
    """Minimize the energy for finite γ by continuation in the inner cutoff.

    Step k solves on [r_min 2^-k, r_max]; each step's grid contains the
    previous one, so padding the old solution gives a feasible start with the
    same energy and the recorded history cannot increase.
    """
    cfg = cfg or SolveConfig()
    if params.infinite_gamma:
        raise InvalidParameters("gamma = inf: use gamma_inf.solve_gamma_inf")
    r_max = cfg.r_max if cfg.r_max is not None else default_r_max(params)
    grid = build_grid(cfg.r_min, r_max, cfg.n_nodes, cfg.ratio)
    p = initial_guess(cfg.init, params, grid, cfg.init_profile)

    history = []
    iterations = 0
    ok = False
    for k in range(cfg.continuation_steps):
        if k > 0:
            grid = extend_inward(grid, cfg.r_min * 2.0 ** -k)
            p = extend_profile(p, grid, params,
                               value=lambda q: energy(q, params).total)
        prob = _TwoField(grid, params)
        x, used, ok = _minimize(prob, prob.pack(p), cfg)
        iterations += used
        p = prob.unpack(x)
        history.append(energy(p, params).total)
        log.debug("continuation step %d: r_min=%.3g energy=%.12g converged=%s",
                  k, grid.r_min, history[-1], ok)

    if len(history) >= 2 and abs(history[-1] - history[-2]) > CONTINUATION_DRIFT * abs(history[-2]):
        ok = False
    result = SolvedProfile(p, build_report(p, params), ok, iterations, history, params)
    if raise_on_failure and not ok:
        raise NonConvergence("tolerances not met", partial=result)
    return result
