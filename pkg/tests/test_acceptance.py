"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line (visible under pytest and
when the file is run directly with ``python3 tests/test_acceptance.py``).
"""

import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from dark_monopole import (
    Parameters, bps_profile, build_grid, check_box_and_monotone, energy_gradient,
    fit_asymptotics, georgi_glashow_C, solve, solve_gamma_inf, trial_energy,
    uniqueness_cross_check,
)
from dark_monopole.bps import bps_values
from dark_monopole.cli import main
from dark_monopole.gamma_inf import optimal_trial_rate, trial_virial_gap
from dark_monopole.io import read_json, read_profile

sys.path.insert(0, str(Path(__file__).parent))
from _profiles import fd_gradient, random_profile, small_grid  # noqa: E402

LN2 = math.log(2.0)
SWEEP_BETAS = (0.5, 1.0, 2.0, 3.0, 6.0, 12.0)


def _say(capsys, number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return ok


def test_criterion_01_bps_reproduction(tmp_path, capsys):
    out, rep = tmp_path / "prof.csv", tmp_path / "rep.json"
    t0 = time.perf_counter()
    code = main(["solve", "--alpha", "1", "--beta", "2", "--gamma", "0", "--nodes", "4001",
                 "--out", str(out), "--report", str(rep)])
    elapsed = time.perf_counter() - t0
    total = read_json(rep)["total"]
    prof = read_profile(out)
    r = prof.grid.nodes
    mask = (r >= 0.01) & (r <= 10.0)
    u_ref, f_ref = bps_values(1.0, r[mask])
    dist = max(np.abs(prof.u[mask] - u_ref).max(), np.abs(prof.f[mask] - f_ref).max())
    ok = code == 0 and abs(total - 2.0) <= 0.01 * 2.0 and dist < 1e-2 and elapsed < 60.0
    assert _say(capsys, 1, ok, f"I={total:.8f} sup-dist={dist:.2e} time={elapsed:.2f}s")


def test_criterion_02_cross_term(capsys):
    grid = build_grid(1e-5, 40.0, 40001, 1.0003)
    p = bps_profile(1.0, grid)
    value = grid.integrate(p.f ** 2 * p.u ** 2)
    target = (math.pi ** 2 / 6.0 - 1.0) / 3.0
    ok = abs(value - target) < 1e-4 and abs(target - 0.2149780) < 1e-7
    assert _say(capsys, 2, ok, f"quadrature={value:.8f} exact={target:.8f}")


def test_criterion_03_sandwich_sweep(tmp_path, capsys):
    code = main(["sweep", "--alpha", "1", "--beta", ",".join(f"{b:g}" for b in SWEEP_BETAS),
                 "--jobs", "2", "--out", str(tmp_path)])
    rows = [line.split(",") for line in (tmp_path / "sweep.csv").read_text().splitlines()[1:]]
    ok = code == 0 and len(rows) == len(SWEEP_BETAS)
    details = []
    for beta, lower, e, upper, status in rows:
        beta, lower, e, upper = map(float, (beta, lower, e, upper))
        lo_formula = min(math.sqrt(2 * beta), 2.0)
        up_formula = (8 - math.pi ** 2 / 3 + (math.pi ** 2 / 6 - 1) * beta) / 3
        ok &= math.isclose(lower, lo_formula, rel_tol=1e-14) and math.isclose(upper, up_formula, rel_tol=1e-14)
        ok &= lower * (1 - 1e-3) <= e <= upper * 1.02
        if beta == 2.0:
            ok &= status == "ON_BOUNDARY" and abs(e - lower) / lower < 1e-3
        else:
            ok &= status == "INSIDE" and lower < e < upper
        details.append(f"b={beta:g}:{e:.4f}")
    assert _say(capsys, 3, ok, " ".join(details))


def test_criterion_04_gamma_inf_headline(capsys):
    t0 = time.perf_counter()
    s = solve_gamma_inf(1.0, 2.0)
    elapsed = time.perf_counter() - t0
    half = s.energy / 2.0
    ok = s.converged and abs(half - 1.787) <= 0.02 and 2.0 < s.energy < 3.8846306 and elapsed < 30.0
    assert _say(capsys, 4, ok, f"I={s.energy:.6f} I/2={half:.5f} time={elapsed:.2f}s")


def test_criterion_05_gamma_inf_invariants(capsys):
    ok = True
    worst_gap, worst_dist = 0.0, 0.0
    for ab in [(1.0, 2.0), (1.0, 8.0)]:
        s = solve_gamma_inf(*ab)
        r, u = s.grid.nodes[1:-1], s.u[1:-1]
        kappa = math.sqrt(ab[0] * ab[1] / 2.0)
        ok &= s.converged and bool(np.all((u > np.exp(-kappa * r)) & (u < 1.0)))
        worst_gap = max(worst_gap, s.virial_gap)
        check = uniqueness_cross_check(*ab)
        worst_dist = max(worst_dist, check.distance)
    ok &= worst_gap < 1e-3 and worst_dist < 1e-4
    assert _say(capsys, 5, ok, f"pointwise ok, virial gap={worst_gap:.2e}, init distance={worst_dist:.2e}")


def test_criterion_06_gradient(capsys):
    worst = 0.0
    grid = small_grid()
    for abg in [(1.0, 2.0, 0.0), (1.0, 6.0, 1.0), (2.0, 3.0, 0.5)]:
        params = Parameters(*abg)
        for seed in range(100):
            p = random_profile(np.random.default_rng(seed), grid)
            g = np.concatenate(energy_gradient(p, params))
            fd = np.concatenate(fd_gradient(p, params, delta=1e-6))
            worst = max(worst, np.abs(g - fd).max() / np.abs(g).max())
    assert _say(capsys, 6, worst < 1e-6, f"max relative deviation={worst:.2e} over 300 profiles")


def test_criterion_07_asymptotics(capsys):
    ok = True
    parts = []
    for abg in [(1.0, 2.0, 0.0), (1.0, 6.0, 1.0)]:
        params = Parameters(*abg)
        s = solve(params)
        fit = fit_asymptotics(s.profile, params)
        rate_err = abs(fit.u_tail_rate - params.tail_rate) / params.tail_rate
        pow_err = abs(fit.f_origin_power - params.origin_power) / params.origin_power
        ok &= s.converged and rate_err < 0.05 and pow_err < 0.10
        parts.append(f"{abg}: rate err={rate_err:.1e} power err={pow_err:.1e}")
        if params.gamma == 0:
            flux_err = abs(fit.f_tail_coefficient - fit.flux_integral) / fit.flux_integral
            ok &= flux_err < 1e-2 and abs(fit.f_tail_coefficient - 1.0) < 1e-3
            parts.append(f"flux err={flux_err:.1e} r(1-f)->{fit.f_tail_coefficient:.6f}")
    grid = build_grid(1e-3, 20.0, 4001, 1.002)
    bps_fit = fit_asymptotics(bps_profile(1.0, grid), Parameters(1.0, 2.0, 0.0))
    ok &= abs(bps_fit.f_tail_coefficient - 1.0) < 1e-3
    parts.append(f"closed form r(1-f)->{bps_fit.f_tail_coefficient:.6f}")
    assert _say(capsys, 7, ok, "; ".join(parts))


def test_criterion_08_box_and_monotone(capsys):
    cases = [(1.0, b, 0.0) for b in SWEEP_BETAS] + [(1.0, 6.0, 1.0), (2.0, 3.0, 0.5), (1.0, 2.0, 1.0)]
    ok = True
    for abg in cases:
        s = solve(Parameters(*abg))
        flags = check_box_and_monotone(s.profile)
        ok &= s.converged and flags.in_unit_box and flags.u_monotone_decreasing and flags.f_monotone_increasing
    g = solve_gamma_inf(1.0, 2.0)
    gflags = check_box_and_monotone(g.profile, u_only=True)
    ok &= g.converged and gflags.in_unit_box and gflags.u_monotone_decreasing
    assert _say(capsys, 8, ok, f"{len(cases) + 1} converged solves checked")


def test_criterion_09_trial_algebra(capsys):
    worst_f, worst_gap = 0.0, 0.0
    for a_, b_ in [(1.0, 2.0), (1.0, 8.0), (0.3, 7.0), (5.0, 0.2)]:
        a0 = optimal_trial_rate(a_, b_)
        target = math.sqrt(2 * a_ * b_ * (1 + 4 * LN2))
        worst_f = max(worst_f, abs(trial_energy(a0, a_, b_) - target) / target)
        worst_gap = max(worst_gap, trial_virial_gap(a0, a_, b_))
    ok = worst_f < 1e-12 and worst_gap < 1e-6
    assert _say(capsys, 9, ok, f"F(a0) rel err={worst_f:.1e}, trial virial gap={worst_gap:.1e}")


def test_criterion_10_georgi_glashow(capsys):
    c0 = georgi_glashow_C(0.0)
    cinf = georgi_glashow_C(math.inf)
    ok = abs(c0 - 1.0) < 0.01 and 1.0 < cinf < 1.9423153
    assert _say(capsys, 10, ok, f"C(0)={c0:.6f} C(inf)={cinf:.5f}")


def _run_all():
    tests = [(name, fn) for name, fn in sorted(globals().items()) if name.startswith("test_criterion_")]
    failed = 0
    for name, fn in tests:
        kwargs = {"capsys": None}
        if "tmp_path" in fn.__code__.co_varnames[: fn.__code__.co_argcount]:
            kwargs["tmp_path"] = Path(tempfile.mkdtemp())
        try:
            fn(**kwargs)
        except AssertionError:
            failed += 1
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(_run_all())
