"""Closed-form BPS pair and the exact constants and bounds derived from it."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .energy import Profile
from .errors import InvalidParameters
from .grid import RadialGrid, derivative_stencil

# coth x - 1/x has absolute rounding error ~eps/x; below this x use the
# Laurent series instead (truncation error < 1e-17 at the switch)
SERIES_SWITCH = 0.5

# coefficients of coth x - 1/x = sum c_k x^(2k+1), i.e. 2^(2k+2) B_(2k+2) / (2k+2)!
_COTH_SERIES = (
    1 / 3, -1 / 45, 2 / 945, -1 / 4725, 2 / 93555, -1382 / 638512875,
    4 / 18243225, -3617 / 162820783125, 87734 / 38979295480125,
    -349222 / 1531329465290625, 310732 / 13447856940643125,
    -472728182 / 201919571963756521875, 2631724 / 11094481976030578125,
    -13571120588 / 564653660170076273671875,
)

ZETA2_MINUS_1 = math.pi ** 2 / 6.0 - 1.0


def _check_alpha(alpha):
    if not (math.isfinite(alpha) and alpha > 0):
        raise InvalidParameters(f"alpha must be positive, got {alpha}")


@dataclass(frozen=True)
class BpsConstants:
    energy: float
    cross_term: float
    flux: float


def bps_constants(alpha: float) -> BpsConstants:
    """Energy 2√α, ∫f²u² = (π²/6 - 1)/(3√α), and lim r²f' = 1/√α."""
    _check_alpha(alpha)
    s = math.sqrt(alpha)
    return BpsConstants(energy=2.0 * s,
                        cross_term=ZETA2_MINUS_1 / (3.0 * s),
                        flux=1.0 / s)


def bps_values(alpha: float, r):
    """u = x/sinh x, f = coth x - 1/x with x = √α r."""
    _check_alpha(alpha)
    x = math.sqrt(alpha) * np.asarray(r, dtype=float)
    small = x < SERIES_SWITCH
    xs = np.where(x > 0, x, 1.0)
    # x/sinh x written with e^{-x} so large x underflows instead of overflowing
    u = np.where(x > 0, 2.0 * xs * np.exp(-xs) / -np.expm1(-2.0 * xs), 1.0)
    x2 = x * x
    series = np.zeros_like(x)
    for c in reversed(_COTH_SERIES):
        series = series * x2 + c
    f = np.where(small, x * series, 1.0 / np.tanh(xs) - 1.0 / xs)
    return u, f


def bps_profile(alpha: float, grid: RadialGrid) -> Profile:
    u, f = bps_values(alpha, grid.nodes)
    return Profile(u, f, grid)


def bps_residual(p: Profile, alpha: float):
    """First-order BPS residuals u' + √α f u and √α r f' - (1 - u²)/r."""
    _check_alpha(alpha)
    s = math.sqrt(alpha)
    r = p.grid.nodes
    up = derivative_stencil(p.grid, p.u)
    fp = derivative_stencil(p.grid, p.f)
    r1 = up + s * p.f * p.u
    r2 = s * r * fp - (1.0 - p.u ** 2) / r
    return r1, r2


def bps_energy(alpha: float) -> float:
    _check_alpha(alpha)
    return 2.0 * math.sqrt(alpha)


def nonbps_upper_bound(alpha: float, beta: float) -> float:
    """Energy of the BPS pair inserted into the γ=0 functional:
    (√α/3)(8 - π²/3 + (π²/6 - 1)β)."""
    _check_alpha(alpha)
    if not beta > 0:
        raise InvalidParameters(f"beta must be positive, got {beta}")
    return math.sqrt(alpha) / 3.0 * (8.0 - math.pi ** 2 / 3.0 + ZETA2_MINUS_1 * beta)


def energy_lower_bound(alpha: float, beta: float) -> float:
    """min{√(2αβ), 2√α}, valid for every γ ≥ 0."""
    _check_alpha(alpha)
    if not beta > 0:
        raise InvalidParameters(f"beta must be positive, got {beta}")
    return min(math.sqrt(2.0 * alpha * beta), 2.0 * math.sqrt(alpha))
