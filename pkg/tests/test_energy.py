import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dark_monopole import (
    InvalidParameters, Parameters, Profile, bps_profile, build_grid, el_residual, energy,
    energy_gradient,
)
from dark_monopole.bps import ZETA2_MINUS_1
from dark_monopole.energy import discrete_residual, energy_hessian

from _profiles import fd_gradient, random_profile, small_grid

GRADIENT_CASES = [(1.0, 2.0, 0.0), (1.0, 6.0, 1.0), (2.0, 3.0, 0.5)]


@pytest.fixture(scope="module")
def fine_grid():
    return build_grid(1e-4, 40.0, 20001, 1.0005)


def test_vacuum_pair_is_zero():
    g = small_grid()
    p = Profile(np.ones(g.n), np.zeros(g.n), g)
    params = Parameters(1.0, 2.0, 0.0)
    e = energy(p, params, tail=False)
    assert e.total == 0.0
    for arr in energy_gradient(p, params, tail=False):
        assert np.all(arr == 0.0)
    for arr in el_residual(p, params):
        assert np.all(arr == 0.0)


def test_bps_energy_and_cross_term(fine_grid):
    e = energy(bps_profile(1.0, fine_grid), Parameters(1.0, 2.0, 0.0))
    assert e.total == pytest.approx(2.0, rel=1e-2)
    assert e.term_cross == pytest.approx(2.0 * ZETA2_MINUS_1 / 3.0, abs=1e-3)


def test_bps_el_residual_second_order():
    def sup(n):
        g = build_grid(0.5, 8.0, n, 1.0)
        ru, rf = el_residual(bps_profile(1.0, g), Parameters(1.0, 2.0, 0.0))
        return max(np.abs(ru).max(), np.abs(rf).max())
    e1, e2 = sup(201), sup(401)
    assert e2 < e1 / 3.5


def test_perturbed_bps_fails_el():
    g = build_grid(0.05, 10.0, 800, 1.0)
    p = bps_profile(1.0, g)
    q = p.copy(f=p.f + 0.01)
    _, rf = el_residual(q, Parameters(1.0, 2.0, 0.0))
    assert np.abs(rf).max() > 1e-3


def test_infinite_gamma_rejected():
    g = small_grid()
    p = Profile(np.ones(g.n), np.zeros(g.n), g)
    with pytest.raises(InvalidParameters):
        energy(p, Parameters(1.0, 2.0, np.inf))


def test_length_mismatch():
    g = small_grid()
    with pytest.raises(InvalidParameters):
        Profile(np.ones(g.n - 1), np.zeros(g.n), g)


@pytest.mark.parametrize("bad", [(0.0, 1.0, 0.0), (1.0, -1.0, 0.0), (1.0, 1.0, -0.1),
                                 (np.nan, 1.0, 0.0), (1.0, 1.0, np.nan)])
def test_invalid_parameters(bad):
    with pytest.raises(InvalidParameters):
        Parameters(*bad)


@pytest.mark.parametrize("abg", GRADIENT_CASES)
@pytest.mark.parametrize("seed", range(5))
def test_gradient_matches_finite_differences(abg, seed):
    params = Parameters(*abg)
    p = random_profile(np.random.default_rng(seed), small_grid())
    gu, gf = energy_gradient(p, params)
    fu, ff = fd_gradient(p, params)
    g, fd = np.concatenate((gu, gf)), np.concatenate((fu, ff))
    assert np.abs(g - fd).max() / np.abs(g).max() < 1e-6


@pytest.mark.parametrize("abg", GRADIENT_CASES)
def test_hessian_matches_gradient_differences(abg):
    params = Parameters(*abg)
    p = random_profile(np.random.default_rng(7), small_grid(n=20))
    uu_d, uu_o, ff_d, ff_o, uf_d = energy_hessian(p, params)
    d = 1e-6
    i = 5
    u = p.u.copy()
    u[i] += d
    gup, gfp = energy_gradient(p.copy(u=u), params)
    u[i] -= 2 * d
    gum, gfm = energy_gradient(p.copy(u=u), params)
    col_u, col_f = (gup - gum) / (2 * d), (gfp - gfm) / (2 * d)
    assert col_u[i] == pytest.approx(uu_d[i], rel=1e-6)
    assert col_u[i + 1] == pytest.approx(uu_o[i], rel=1e-6)
    assert col_f[i] == pytest.approx(uf_d[i], rel=1e-5, abs=1e-9)


def test_discrete_residual_is_scaled_gradient():
    params = Parameters(1.0, 6.0, 1.0)
    p = random_profile(np.random.default_rng(3), small_grid())
    gu, gf = energy_gradient(p, params)
    ru, rf = discrete_residual(p, params)
    w, r = p.grid.weights, p.grid.nodes
    np.testing.assert_allclose(ru, -gu[1:] / (4 * w[1:]))
    np.testing.assert_allclose(rf, -gf[1:] / (2 * r[1:] ** 2 * w[1:]))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(GRADIENT_CASES), st.booleans())
def test_terms_nonnegative(seed, abg, tail):
    p = random_profile(np.random.default_rng(seed), small_grid())
    e = energy(p, Parameters(*abg), tail=tail)
    assert min(e.as_dict().values()) >= 0.0


@pytest.mark.parametrize("c", [0.5, 2.0])
@pytest.mark.parametrize("seed", range(5))
def test_scaling_symmetry(c, seed):
    p = random_profile(np.random.default_rng(seed), small_grid())
    a, b = 1.3, 2.7
    e0 = energy(p, Parameters(a, b, 0.0)).total
    e1 = energy(p.copy(f=c * p.f), Parameters(a / c ** 2, b, 0.0), f_inf=c).total
    assert e1 == pytest.approx(e0, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.05, 1.99), st.floats(0.1, 10.0))
def test_beta_alpha_trade(seed, beta, alpha):
    # below β = 2, replacing (α, β) by (αβ/2, 2) lowers every term or keeps it
    p = random_profile(np.random.default_rng(seed), small_grid())
    hi = energy(p, Parameters(alpha, beta, 0.0))
    lo = energy(p, Parameters(alpha * beta / 2.0, 2.0, 0.0))
    for k, v in lo.as_dict().items():
        assert v <= hi.as_dict()[k] * (1 + 1e-12) + 1e-15


def test_bogomolnyi_lower_bound_on_random_profiles():
    # discrete energy of any admissible pair at β = 2 sits above 2√α up to the slack
    g = build_grid(1e-3, 20.0, 4001, 1.002)
    for seed in range(20):
        p = random_profile(np.random.default_rng(seed), g)
        for a in (0.5, 1.0, 3.0):
            assert energy(p, Parameters(a, 2.0, 0.0)).total >= 2.0 * np.sqrt(a) * 0.98
