"""Discrete reduced energy, its exact gradient/Hessian, and EL residuals.

Assembly is finite-element style: derivative terms are per-cell differences
(exact for piecewise-linear profiles), the remaining integrands use the
trapezoid weights of the grid.  With ``tail=True`` the analytic exterior
contribution from [r_max, ∞) is added, assuming the linearized far-field
behaviour u ~ u_N e^{-κ f_N (r - r_max)} and
1 - f ~ (1 - f_N)(r_max/r) e^{-m(r - r_max)} with κ = √(αβ/2), m = √(2γ).
The u rate uses the local value κ f_N rather than κ because for γ = 0 the
Higgs field is still 1 - O(1/r) at r_max.  That exterior term is what makes
the last node a natural (Robin) boundary rather than a clamp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameters
from .grid import RadialGrid, derivative_stencil, second_derivative_stencil

INFINITY = math.inf


@dataclass(frozen=True)
class Parameters:
    alpha: float
    beta: float
    gamma: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise InvalidParameters(f"alpha must be positive, got {self.alpha}")
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise InvalidParameters(f"beta must be positive, got {self.beta}")
        if math.isnan(self.gamma) or self.gamma < 0:
            raise InvalidParameters(f"gamma must be >= 0 or inf, got {self.gamma}")

    @property
    def infinite_gamma(self) -> bool:
        return math.isinf(self.gamma)

    @property
    def tail_rate(self) -> float:
        """Decay rate √(αβ/2) of u at large r."""
        return math.sqrt(self.alpha * self.beta / 2.0)

    @property
    def origin_power(self) -> float:
        """Exponent σ of f ~ r^σ near the origin."""
        return math.sqrt(0.25 + self.beta) - 0.5


@dataclass(frozen=True, eq=False)
class Profile:
    u: np.ndarray
    f: np.ndarray
    grid: RadialGrid

    def __post_init__(self):
        n = self.grid.n
        for name in ("u", "f"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise InvalidParameters(
                    f"{name} has shape {arr.shape}, grid has {n} nodes")
            object.__setattr__(self, name, arr)

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    def copy(self, u=None, f=None) -> "Profile":
        return Profile(np.array(self.u if u is None else u, dtype=float),
                       np.array(self.f if f is None else f, dtype=float),
                       self.grid)


@dataclass(frozen=True)
class EnergyBreakdown:
    term_u_grad: float
    term_u_pot: float
    term_f_grad: float
    term_cross: float
    term_higgs: float

    @property
    def total(self) -> float:
        return (self.term_u_grad + self.term_u_pot + self.term_f_grad
                + self.term_cross + self.term_higgs)

    def as_dict(self) -> dict:
        return {
            "term_u_grad": self.term_u_grad,
            "term_u_pot": self.term_u_pot,
            "term_f_grad": self.term_f_grad,
            "term_cross": self.term_cross,
            "term_higgs": self.term_higgs,
            "total": self.total,
        }


def _finite(params: Parameters):
    if params.infinite_gamma:
        raise InvalidParameters(
            "gamma = inf has its own single-field functional; use gamma_inf")


def _tail_constants(params: Parameters):
    return params.tail_rate, math.sqrt(2.0 * params.gamma)


def energy(p: Profile, params: Parameters, *, tail: bool = True,
           f_inf: float = 1.0) -> EnergyBreakdown:
    """Per-term discrete energy.

    ``f_inf`` is the asymptotic Higgs value assumed by the exterior term; it
    only differs from 1 when checking the f ↦ c f, α ↦ α/c² symmetry.
    """
    _finite(params)
    a, b, g = params.alpha, params.beta, params.gamma
    grid = p.grid
    r, w, h = grid.nodes, grid.weights, grid.gaps
    u, f = p.u, p.f
    du, df = np.diff(u), np.diff(f)
    cell_r2 = r[:-1] * r[1:]

    u_grad = 2.0 * np.sum(du * du / h)
    f_grad = a * np.sum(cell_r2 * df * df / h)
    u_pot = np.sum(w * (1.0 - u * u) ** 2 / (r * r))
    cross = a * b * np.sum(w * f * f * u * u)
    higgs = 0.5 * a * g * np.sum(w * r * r * (f * f - 1.0) ** 2) if g > 0 else 0.0

    if tail:
        kappa, m = _tail_constants(params)
        R = grid.r_max
        uN, gN = u[-1], f_inf - f[-1]
        u_grad += kappa * f[-1] * uN * uN
        cross += kappa * f[-1] * uN * uN
        u_pot += 1.0 / R
        f_grad += a * R * (1.0 + 0.5 * m * R) * gN * gN
        higgs += 0.5 * a * m * R * R * gN * gN
    return EnergyBreakdown(float(u_grad), float(u_pot), float(f_grad),
                           float(cross), float(higgs))


def energy_gradient(p: Profile, params: Parameters, *, tail: bool = True,
                    f_inf: float = 1.0):
    """Exact gradient of :func:`energy` with respect to nodal values.

    Returns full-length arrays; the r_min entries are zero because u(r_min)
    and f(r_min) are Dirichlet data.  The r_max entries are live (natural
    boundary closed by the exterior term).
    """
    _finite(params)
    a, b, g = params.alpha, params.beta, params.gamma
    grid = p.grid
    r, w, h = grid.nodes, grid.weights, grid.gaps
    u, f = p.u, p.f
    cell_r2 = r[:-1] * r[1:]

    flux_u = 4.0 * np.diff(u) / h
    gu = w * (-4.0 * u * (1.0 - u * u) / (r * r) + 2.0 * a * b * f * f * u)
    gu[:-1] -= flux_u
    gu[1:] += flux_u

    flux_f = 2.0 * a * cell_r2 * np.diff(f) / h
    gf = w * (2.0 * a * b * f * u * u + 2.0 * a * g * r * r * f * (f * f - 1.0))
    gf[:-1] -= flux_f
    gf[1:] += flux_f

    if tail:
        kappa, m = _tail_constants(params)
        R = grid.r_max
        gu[-1] += 4.0 * kappa * f[-1] * u[-1]
        gf[-1] += 2.0 * kappa * u[-1] ** 2 - 2.0 * a * R * (1.0 + m * R) * (f_inf - f[-1])
    gu[0] = 0.0
    gf[0] = 0.0
    return gu, gf


def energy_hessian(p: Profile, params: Parameters, *, tail: bool = True):
    """Nonzero Hessian entries as node-indexed diagonals.

    Returns ``(uu_diag, uu_off, ff_diag, ff_off, uf_diag)``; the ``*_off``
    arrays couple node i with node i+1.  Interleaving (u_i, f_i) gives a
    block-tridiagonal matrix with 2x2 blocks.
    """
    _finite(params)
    a, b, g = params.alpha, params.beta, params.gamma
    grid = p.grid
    r, w, h = grid.nodes, grid.weights, grid.gaps
    u, f = p.u, p.f
    cell_r2 = r[:-1] * r[1:]

    ku = 4.0 / h
    uu_diag = w * (-4.0 * (1.0 - 3.0 * u * u) / (r * r) + 2.0 * a * b * f * f)
    uu_diag[:-1] += ku
    uu_diag[1:] += ku
    uu_off = -ku

    kf = 2.0 * a * cell_r2 / h
    ff_diag = w * (2.0 * a * b * u * u + 2.0 * a * g * r * r * (3.0 * f * f - 1.0))
    ff_diag[:-1] += kf
    ff_diag[1:] += kf
    ff_off = -kf

    uf_diag = w * 4.0 * a * b * f * u
    if tail:
        kappa, m = _tail_constants(params)
        R = grid.r_max
        uu_diag[-1] += 4.0 * kappa * f[-1]
        ff_diag[-1] += 2.0 * a * R * (1.0 + m * R)
        uf_diag[-1] += 4.0 * kappa * u[-1]
    return uu_diag, uu_off, ff_diag, ff_off, uf_diag


def discrete_residual(p: Profile, params: Parameters, *, tail: bool = True):
    """Euler–Lagrange residuals of the discrete (collocated) system.

    The gradient is rescaled by the lumped mass so that it reads like
    u'' - (αβ/2)f²u - u(u²-1)/r² and f'' + 2f'/r - βfu²/r² - γf(f²-1)
    evaluated with conservative three-point stencils.  Only free nodes
    (index 1 onward) are returned.
    """
    gu, gf = energy_gradient(p, params, tail=tail)
    r, w = p.grid.nodes, p.grid.weights
    res_u = -gu[1:] / (4.0 * w[1:])
    res_f = -gf[1:] / (2.0 * params.alpha * r[1:] ** 2 * w[1:])
    return res_u, res_f


def el_residual(p: Profile, params: Parameters):
    """Pointwise Euler–Lagrange residuals at interior nodes.

    res_u = u'' - (αβ/2) f² u - u(u² - 1)/r²
    res_f = f'' + (2/r) f' - (β/r²) f u² - γ f (f² - 1)
    """
    _finite(params)
    a, b, g = params.alpha, params.beta, params.gamma
    grid = p.grid
    r = grid.nodes[1:-1]
    u, f = p.u[1:-1], p.f[1:-1]
    upp = second_derivative_stencil(grid, p.u)
    fpp = second_derivative_stencil(grid, p.f)
    fp = derivative_stencil(grid, p.f)[1:-1]
    res_u = upp - 0.5 * a * b * f * f * u - u * (u * u - 1.0) / (r * r)
    res_f = fpp + 2.0 * fp / r - b * f * u * u / (r * r) - g * f * (f * f - 1.0)
    return res_u, res_f
