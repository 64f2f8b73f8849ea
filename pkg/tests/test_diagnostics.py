import math

import numpy as np
import pytest

from dark_monopole import (
    BoundCheck, Parameters, Profile, SolveConfig, bps_profile, build_grid, check_box_and_monotone,
    fit_asymptotics, run_diagnostics, solve, solve_gamma_inf, verify_energy_bounds,
)
from dark_monopole.diagnostics import predicted_f_tail_rate
from dark_monopole.errors import WindowTooShort
from dark_monopole.report import EnergyReport
from dark_monopole.energy import EnergyBreakdown


@pytest.fixture(scope="module")
def bps():
    return bps_profile(1.0, build_grid(1e-3, 20.0, 4001, 1.002))


@pytest.fixture(scope="module")
def solves():
    return {abg: solve(Parameters(*abg)) for abg in [(1.0, 2.0, 0.0), (1.0, 6.0, 0.0), (1.0, 6.0, 1.0),
                                                      (2.0, 3.0, 0.5)]}


def test_bps_flags(bps):
    flags = check_box_and_monotone(bps)
    assert flags.in_unit_box and flags.u_monotone_decreasing and flags.f_monotone_increasing


def test_constant_u_not_monotone(bps):
    p = bps.copy(u=np.full(bps.grid.n, 0.5))
    assert not check_box_and_monotone(p).u_monotone_decreasing


def test_box_violation(bps):
    u = bps.u.copy()
    u[5] = 1.01
    assert not check_box_and_monotone(bps.copy(u=u)).in_unit_box


def test_bps_asymptotics(bps):
    fit = fit_asymptotics(bps, Parameters(1.0, 2.0, 0.0))
    assert fit.u_tail_rate == pytest.approx(1.0, rel=0.05)
    assert fit.f_tail_coefficient == pytest.approx(1.0, abs=1e-3)
    assert fit.flux_integral == pytest.approx(1.0, abs=1e-3)
    assert fit.f_origin_power == pytest.approx(1.0, rel=0.1)
    assert fit.u_origin_power == pytest.approx(2.0, rel=0.1)


@pytest.mark.parametrize("abg", [(1.0, 2.0, 0.0), (1.0, 6.0, 0.0), (1.0, 6.0, 1.0), (2.0, 3.0, 0.5)])
def test_solved_asymptotics(solves, abg):
    params = Parameters(*abg)
    fit = fit_asymptotics(solves[abg].profile, params)
    assert fit.u_tail_rate == pytest.approx(params.tail_rate, rel=0.05)
    assert fit.f_origin_power == pytest.approx(params.origin_power, rel=0.10)
    assert fit.u_origin_power == pytest.approx(2.0, rel=0.10)
    if params.gamma == 0:
        assert fit.f_tail_coefficient == pytest.approx(fit.flux_integral, rel=1e-2)
        # γ = 0 tails carry the algebraic factor and sit on the slow side of κ
        assert fit.u_tail_rate <= params.tail_rate
    else:
        assert fit.f_tail_rate == pytest.approx(predicted_f_tail_rate(params), rel=0.05)


def test_predicted_f_tail_rate():
    assert predicted_f_tail_rate(Parameters(1.0, 6.0, 1.0)) == pytest.approx(math.sqrt(2))
    assert predicted_f_tail_rate(Parameters(1.0, 0.5, 4.0)) == pytest.approx(1.0)


def test_bound_classification(solves):
    assert run_diagnostics(solves[(1.0, 2.0, 0.0)].profile, Parameters(1.0, 2.0, 0.0)).bound_check \
        is BoundCheck.ON_BOUNDARY
    assert run_diagnostics(solves[(1.0, 6.0, 0.0)].profile, Parameters(1.0, 6.0, 0.0)).bound_check \
        is BoundCheck.INSIDE


def test_gamma_inf_diagnostics():
    s = solve_gamma_inf(1.0, 2.0)
    d = run_diagnostics(s.profile, Parameters(1.0, 2.0, math.inf), s.report)
    assert d.bound_check is BoundCheck.INSIDE
    assert d.f_tail_rate is None and d.f_origin_power is None
    assert d.u_tail_rate == pytest.approx(1.0, rel=0.05)


def _report(total, lower, upper):
    return EnergyReport(EnergyBreakdown(total, 0, 0, 0, 0), lower, upper, 0.0, 0.0, True, True, True)


@pytest.mark.parametrize("total,upper,status", [
    (2.5, 3.0, BoundCheck.INSIDE),
    (2.0005, 3.0, BoundCheck.ON_BOUNDARY),
    (1.9, 3.0, BoundCheck.VIOLATED),
    (3.1, 3.0, BoundCheck.VIOLATED),
    (2.9999, 3.0, BoundCheck.ON_BOUNDARY),
    (50.0, None, BoundCheck.INSIDE),
])
def test_verify_energy_bounds(total, upper, status):
    assert verify_energy_bounds(_report(total, 2.0, upper), Parameters(1.0, 2.0, 0.0)).status is status


def test_short_window_raises():
    g = build_grid(0.5, 2.0, 16, 1.0)
    p = bps_profile(1.0, g)
    with pytest.raises(WindowTooShort):
        fit_asymptotics(p, Parameters(1.0, 2.0, 0.0))


def test_report_dict_serializable(solves):
    d = run_diagnostics(solves[(1.0, 6.0, 1.0)].profile, Parameters(1.0, 6.0, 1.0)).as_dict()
    assert d["bound_check"] == "INSIDE"
    assert d["f_tail_coefficient"] is None
