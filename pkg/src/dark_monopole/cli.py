"""Command-line front end: solve, bps, sweep, verify, plot.

Exit codes: 0 success, 1 usage or validation error, 2 non-convergence.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from . import __version__
from .bps import bps_constants, bps_values, energy_lower_bound, nonbps_upper_bound
from .diagnostics import (
    BoundCheck,
    predicted_f_tail_rate,
    run_diagnostics,
    verify_energy_bounds,
)
from .energy import Parameters
from .errors import InvalidParameters, WindowTooShort
from .gamma_inf import solve_gamma_inf, virial_gap
from .grid import build_grid
from .io import format_float, read_config, read_profile, write_json, write_profile
from .minimizer import InitKind, SolveConfig, solve
from .svg import Figure

log = logging.getLogger("dark_monopole")

EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGED = 0, 1, 2

UNITS = "energies are the dimensionless reduced energy I; physical energy is (4 pi v / e) I"

# relative tolerances used by `verify`
TAIL_RATE_TOL = 0.05
ORIGIN_POWER_TOL = 0.10
FLUX_TOL = 0.01
VIRIAL_TOL = 1e-3
# extra room above the γ = 0 upper bound accepted by `sweep`
SWEEP_UPPER_BUDGET = 0.02

BPS_GRID = dict(r_min=0.01, r_max=20.0, nodes=2000, ratio=1.0)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags, which would collide with the
    # non-convergence code
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunManifest:
    command: str
    parameters: dict
    config: dict
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    timestamp: str = ""
    version: str = __version__

    @classmethod
    def now(cls, command, parameters, config, inputs=(), outputs=()):
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        return cls(command, dict(parameters), dict(config), [str(p) for p in inputs],
                   [str(p) for p in outputs], stamp)

    def as_dict(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# flag parsing


def _number(flag, text, *, integer=False, allow_inf=False):
    try:
        if allow_inf and str(text).strip().lower() in ("inf", "infinity", "+inf"):
            return math.inf
        value = int(text) if integer else float(text)
    except (TypeError, ValueError):
        raise UsageError(f"{flag}: expected {'an integer' if integer else 'a number'}, got {text!r}") from None
    if not integer and not math.isfinite(value):
        raise UsageError(f"{flag}: expected a finite number, got {text!r}")
    return value


# flag name -> (converter kwargs, default)
_OPTIONS = {
    "alpha": (dict(), None),
    "beta": (dict(), None),
    "gamma": (dict(allow_inf=True), 0.0),
    "r_min": (dict(), None),
    "r_max": (dict(), None),
    "nodes": (dict(integer=True), None),
    "ratio": (dict(), None),
    "continuation_steps": (dict(integer=True), None),
    "grad_tol": (dict(), None),
    "newton_tol": (dict(), None),
    "max_iters": (dict(integer=True), None),
    "jobs": (dict(integer=True), 1),
}
_TEXT_OPTIONS = {"init": "bps", "out": None, "report": None, "init_profile": None}


def _flag(name):
    return "--" + name.replace("_", "-")


def _add_common(p: argparse.ArgumentParser, *, beta_list=False):
    for name in _OPTIONS:
        help_ = "comma-separated list" if (name == "beta" and beta_list) else None
        p.add_argument(_flag(name), dest=name, default=None, metavar="X", help=help_)
    p.add_argument("--init", default=None, choices=[k.value for k in InitKind])
    p.add_argument("--init-profile", dest="init_profile", default=None,
                   help="profile CSV used by --init file")
    p.add_argument("--out", default=None)
    p.add_argument("--report", default=None)
    p.add_argument("--config", default=None, help="key = value file; flags override it")


def _resolve(ns, *, beta_list=False) -> dict:
    """Merge built-in defaults < config file < flags, converting each value
    and naming the flag on failure."""
    raw = {}
    if ns.config:
        try:
            raw.update(read_config(ns.config))
        except OSError as exc:
            raise UsageError(f"--config: {exc}") from None
        unknown = sorted(set(raw) - set(_OPTIONS) - set(_TEXT_OPTIONS))
        if unknown:
            raise UsageError(f"--config: unknown key {unknown[0]!r}")
    for name in list(_OPTIONS) + list(_TEXT_OPTIONS):
        v = getattr(ns, name, None)
        if v is not None:
            raw[name] = v
    out = {}
    for name, (kw, default) in _OPTIONS.items():
        if name not in raw:
            out[name] = default
        elif name == "beta" and beta_list:
            items = [s for s in str(raw[name]).split(",") if s.strip()]
            out[name] = [_number("--beta", s) for s in items]
        else:
            out[name] = _number(_flag(name), raw[name], **kw)
    for name, default in _TEXT_OPTIONS.items():
        out[name] = raw.get(name, default)
    if out["init"] not in [k.value for k in InitKind]:
        raise UsageError(f"--init: unknown kind {out['init']!r}")
    if out["jobs"] < 1:
        raise UsageError("--jobs: must be >= 1")
    return out


def _require_positive(opts, name):
    v = opts[name]
    if v is None:
        raise UsageError(f"{_flag(name)} is required")
    if not v > 0:
        raise UsageError(f"{_flag(name)} must be positive, got {v}")
    return v


def _parameters(opts) -> Parameters:
    alpha = _require_positive(opts, "alpha")
    beta = _require_positive(opts, "beta")
    gamma = opts["gamma"]
    if math.isnan(gamma) or gamma < 0:
        raise UsageError(f"--gamma must be >= 0 or inf, got {gamma}")
    return Parameters(alpha, beta, gamma)


def _solve_config(opts) -> SolveConfig:
    mapping = dict(continuation_steps="continuation_steps", n_nodes="nodes", ratio="ratio",
                   r_min="r_min", r_max="r_max", grad_tol="grad_tol", newton_tol="newton_tol",
                   max_iters="max_iters")
    kw = {k: opts[v] for k, v in mapping.items() if opts[v] is not None}
    kw["init"] = opts["init"]
    for key in ("n_nodes", "continuation_steps", "max_iters", "grad_tol", "newton_tol", "r_min", "ratio"):
        if key in kw and not kw[key] > 0:
            raise UsageError(f"{_flag(mapping[key])} must be positive, got {kw[key]}")
    if opts["init"] == InitKind.FROM_FILE.value:
        if not opts["init_profile"]:
            raise UsageError("--init file needs --init-profile PATH")
        kw["init_profile"] = read_profile(opts["init_profile"]).as_profile()
    try:
        return SolveConfig(**kw)
    except InvalidParameters as exc:
        raise UsageError(str(exc)) from None


def _params_dict(params: Parameters) -> dict:
    return {"alpha": params.alpha, "beta": params.beta, "gamma": params.gamma}


# --------------------------------------------------------------------------
# solve


def _solve_payload(params: Parameters, cfg: SolveConfig):
    """Solve one point; returns (r, u, f or None, payload dict, converged)."""
    if params.infinite_gamma:
        sol = solve_gamma_inf(params.alpha, params.beta, cfg)
        p, report = sol.profile, sol.report
        extra = dict(converged=sol.converged, iterations=sol.iterations, history=sol.history,
                     virial_gap=sol.virial_gap, half_energy=0.5 * sol.energy)
        f = None
    else:
        sol = solve(params, cfg)
        p, report = sol.profile, sol.report
        extra = dict(converged=sol.converged, iterations=sol.iterations, history=sol.history,
                     half_energy=0.5 * report.total)
        f = p.f
    payload = {**report.as_dict(), "total": report.total, **extra}
    try:
        payload.update(run_diagnostics(p, params, report).as_dict())
    except WindowTooShort as exc:
        payload["diagnostics_error"] = str(exc)
    return p.r, p.u, f, payload, sol.converged


def cmd_solve(opts) -> int:
    params = _parameters(opts)
    cfg = _solve_config(opts)
    out = Path(opts["out"] or "profile.csv")
    rep = Path(opts["report"] or "report.json")
    r, u, f, payload, ok = _solve_payload(params, cfg)
    write_profile(out, r, u, f)
    inputs = [opts["init_profile"]] if opts["init_profile"] else []
    manifest = RunManifest.now("solve", _params_dict(params), cfg.as_dict(), inputs, [out, rep])
    write_json(rep, {**payload, "units": UNITS, "manifest": manifest.as_dict()})
    print(f"I = {format_float(payload['total'])}  I/2 = {format_float(payload['half_energy'])}  "
          f"converged = {ok}")
    if not ok:
        log.error("solver did not meet its tolerances; partial outputs written")
        return EXIT_NONCONVERGED
    return EXIT_OK


# --------------------------------------------------------------------------
# bps


def cmd_bps(opts) -> int:
    alpha = _require_positive(opts, "alpha")
    g = {k: (opts[k] if opts[k] is not None else v) for k, v in BPS_GRID.items()}
    try:
        grid = build_grid(g["r_min"], g["r_max"], g["nodes"], g["ratio"])
    except InvalidParameters as exc:
        raise UsageError(str(exc)) from None
    u, f = bps_values(alpha, grid.nodes)
    out = Path(opts["out"] or "bps.csv")
    rep = Path(opts["report"] or "bps.json")
    write_profile(out, grid.nodes, u, f)
    c = bps_constants(alpha)
    manifest = RunManifest.now("bps", {"alpha": alpha, "beta": 2.0, "gamma": 0.0}, g, [], [out, rep])
    write_json(rep, {"energy": c.energy, "cross_term": c.cross_term, "flux": c.flux,
                     "units": UNITS, "manifest": manifest.as_dict()})
    print(f"energy = {format_float(c.energy)}  cross_term = {format_float(c.cross_term)}  "
          f"flux = {format_float(c.flux)}")
    return EXIT_OK


# --------------------------------------------------------------------------
# sweep


def _beta_tag(beta: float) -> str:
    return format(beta, "g").replace(".", "p").replace("-", "m")


def _sweep_point(task):
    """Worker: solve one β and write its own profile/report files."""
    alpha, beta, gamma, cfg_dict, run_dir = task
    params = Parameters(alpha, beta, gamma)
    cfg = SolveConfig(**cfg_dict)
    r, u, f, payload, ok = _solve_payload(params, cfg)
    stem = Path(run_dir) / f"beta_{_beta_tag(beta)}"
    write_profile(stem.with_suffix(".csv"), r, u, f)
    write_json(stem.with_suffix(".json"), {**payload, "units": UNITS})
    return beta, payload["total"], ok


def sweep_status(energy, lower, upper, converged) -> str:
    if not converged:
        return "NONCONVERGED"
    point = SimpleNamespace(total=energy, lower_bound=lower, upper_bound=upper)
    status = verify_energy_bounds(point, None).status
    if status is BoundCheck.VIOLATED and upper is not None and energy >= lower:
        # above the upper bound but inside the discretization budget
        if energy <= upper * (1.0 + SWEEP_UPPER_BUDGET):
            status = BoundCheck.ON_BOUNDARY
    return status.value


def bounds_figure(alpha: float, betas, energies=None) -> Figure:
    lo_b, hi_b = min(min(betas), 2.0), max(max(betas), 2.0)
    grid = np.union1d(np.linspace(0.0, hi_b * 1.05, 400)[1:], [2.0])
    grid = grid[grid >= lo_b * 0.5]
    lower = [energy_lower_bound(alpha, b) for b in grid]
    upper = [nonbps_upper_bound(alpha, b) for b in grid]
    fig = Figure(title=f"Energy bounds, alpha = {alpha:g}, gamma = 0",
                 xlabel="beta", ylabel="I")
    fig.line(grid, lower, label="lower bound")
    fig.line(grid, upper, label="upper bound", dashed=True)
    if energies is not None:
        fig.points(betas, energies, label="computed energy")
    return fig


def cmd_sweep(opts) -> int:
    alpha = _require_positive(opts, "alpha")
    betas = opts["beta"] or []
    if not betas:
        raise UsageError("--beta: empty beta list")
    if any(not b > 0 for b in betas):
        raise UsageError("--beta: every value must be positive")
    if len(set(betas)) != len(betas):
        raise UsageError("--beta: duplicate values")
    gamma = opts["gamma"]
    if not (gamma >= 0 and math.isfinite(gamma)):
        raise UsageError("--gamma: sweep needs a finite gamma >= 0")
    cfg = _solve_config(opts)
    cfg_dict = cfg.as_dict()
    if cfg.init_profile is not None:
        raise UsageError("--init file is not supported by sweep")
    out_dir = Path(opts["out"] or "sweep")
    run_dir = out_dir / "runs"
    run_dir.mkdir(parents=True, exist_ok=True)

    tasks = [(alpha, b, gamma, cfg_dict, str(run_dir)) for b in betas]
    if opts["jobs"] == 1:
        results = [_sweep_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=opts["jobs"]) as pool:
            results = list(pool.map(_sweep_point, tasks))

    rows = []
    for beta, e, ok in sorted(results):
        params = Parameters(alpha, beta, gamma)
        lower = energy_lower_bound(alpha, beta)
        upper = nonbps_upper_bound(alpha, beta) if gamma == 0 else None
        rows.append((beta, lower, e, upper, sweep_status(e, lower, upper, ok)))
        log.info("beta=%g I=%.8f %s", params.beta, e, rows[-1][-1])

    index = out_dir / "sweep.csv"
    with open(index, "w") as fh:
        fh.write("beta,lower,energy,upper,status\n")
        for beta, lower, e, upper, status in rows:
            up = "" if upper is None else format_float(upper)
            fh.write(f"{format_float(beta)},{format_float(lower)},{format_float(e)},{up},{status}\n")
    svg = out_dir / "sweep.svg"
    bounds_figure(alpha, [r[0] for r in rows], [r[2] for r in rows]).save(svg)
    rep = Path(opts["report"] or out_dir / "sweep.json")
    manifest = RunManifest.now("sweep", {"alpha": alpha, "beta": list(betas), "gamma": gamma},
                               cfg_dict, [], [index, svg, rep])
    write_json(rep, {"rows": [dict(zip(("beta", "lower", "energy", "upper", "status"), r)) for r in rows],
                     "units": UNITS, "manifest": manifest.as_dict()})
    for beta, lower, e, upper, status in rows:
        print(f"beta = {beta:g}  lower = {lower:.6f}  I = {e:.6f}  "
              f"upper = {'-' if upper is None else f'{upper:.6f}'}  {status}")
    if any(r[-1] == "NONCONVERGED" for r in rows):
        return EXIT_NONCONVERGED
    return EXIT_OK


# --------------------------------------------------------------------------
# verify


def _check(checks, name, passed, value=None, target=None, note=None):
    entry = {"passed": bool(passed), "value": value, "target": target}
    if note:
        entry["note"] = note
    checks[name] = entry


def _rel(a, b):
    return abs(a - b) / abs(b)


def verify_profile(loaded, params: Parameters, residual_tol: float) -> dict:
    """Every diagnostic on an imported profile, as {name: {passed, value, target}}."""
    p = loaded.as_profile()
    checks = {}
    if params.infinite_gamma:
        from .gamma_inf import build_report_gamma_inf
        report = build_report_gamma_inf(p.u, p.grid, params.alpha, params.beta)
    else:
        from .minimizer import build_report
        report = build_report(p, params)
    _check(checks, "el_residual", report.el_residual_norm <= residual_tol,
           report.el_residual_norm, residual_tol)
    _check(checks, "in_unit_box", report.in_unit_box)
    _check(checks, "u_monotone_decreasing", report.monotone_u)
    if not params.infinite_gamma:
        _check(checks, "f_monotone_increasing", report.monotone_f)
    bound = verify_energy_bounds(report, params)
    _check(checks, "energy_bounds", bound.status is not BoundCheck.VIOLATED, report.total,
           [report.lower_bound, report.upper_bound], note=bound.status.value)
    try:
        diag = run_diagnostics(p, params, report)
    except WindowTooShort as exc:
        _check(checks, "asymptotic_fits", False, note=str(exc))
        return checks
    _check(checks, "u_tail_rate", _rel(diag.u_tail_rate, params.tail_rate) < TAIL_RATE_TOL,
           diag.u_tail_rate, params.tail_rate)
    if params.infinite_gamma:
        gap = virial_gap(p.u, p.grid, params.alpha, params.beta)
        _check(checks, "virial_gap", gap < VIRIAL_TOL, gap, VIRIAL_TOL)
        inner = p.u[1:-1]
        floor = np.exp(-params.tail_rate * p.r[1:-1])
        _check(checks, "pointwise_bounds", bool(np.all((inner > floor) & (inner < 1.0))))
        return checks
    _check(checks, "f_origin_power",
           _rel(diag.f_origin_power, params.origin_power) < ORIGIN_POWER_TOL,
           diag.f_origin_power, params.origin_power)
    if params.gamma == 0:
        _check(checks, "flux", _rel(diag.f_tail_coefficient, diag.flux_integral) < FLUX_TOL,
               diag.f_tail_coefficient, diag.flux_integral)
    else:
        target = predicted_f_tail_rate(params)
        _check(checks, "f_tail_rate", _rel(diag.f_tail_rate, target) < TAIL_RATE_TOL,
               diag.f_tail_rate, target)
    return checks


def cmd_verify(opts, profile_path) -> int:
    params = _parameters(opts)
    loaded = read_profile(profile_path)
    if loaded.f is None and not params.infinite_gamma:
        raise UsageError(f"{profile_path}: r,u profile needs --gamma inf")
    if loaded.f is not None and params.infinite_gamma:
        raise UsageError(f"{profile_path}: --gamma inf expects an r,u profile")
    tol = opts["newton_tol"] or SolveConfig.newton_tol
    try:
        checks = verify_profile(loaded, params, tol)
    except InvalidParameters as exc:
        raise UsageError(f"{profile_path}: {exc}") from None
    passed = all(c["passed"] for c in checks.values())
    manifest = RunManifest.now("verify", _params_dict(params), {"newton_tol": tol}, [profile_path],
                               [opts["report"]] if opts["report"] else [])
    verdict = {"passed": passed, "checks": checks, "manifest": manifest.as_dict()}
    if opts["report"]:
        write_json(opts["report"], verdict)
    for name, c in checks.items():
        print(f"{'PASS' if c['passed'] else 'FAIL'} {name}")
    print("verdict:", "PASS" if passed else "FAIL")
    return EXIT_OK if passed else EXIT_USAGE


# --------------------------------------------------------------------------
# plot


def cmd_plot(opts, profile_path) -> int:
    loaded = read_profile(profile_path)
    r = loaded.grid.nodes
    keep = r <= opts["r_max"] if opts["r_max"] is not None else np.ones_like(r, dtype=bool)
    if keep.sum() < 2:
        raise UsageError("--r-max leaves fewer than two nodes to plot")
    fig = Figure(title=Path(profile_path).name, xlabel="r", ylabel="profile")
    fig.line(r[keep], loaded.u[keep], label="u")
    if loaded.f is not None:
        fig.line(r[keep], loaded.f[keep], label="f")
    out = Path(opts["out"] or Path(profile_path).with_suffix(".svg"))
    fig.save(out)
    print(f"wrote {out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dark-monopole", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    _add_common(sub.add_parser("solve", help="minimize the energy for one coupling set"))
    _add_common(sub.add_parser("bps", help="write the closed-form BPS profile"))
    _add_common(sub.add_parser("sweep", help="solve over a beta list and plot the bounds"),
                beta_list=True)
    p = sub.add_parser("verify", help="run all diagnostics on a profile CSV")
    p.add_argument("profile")
    _add_common(p)
    p = sub.add_parser("plot", help="SVG plot of a profile CSV")
    p.add_argument("profile")
    _add_common(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        if ns.command is None:
            raise UsageError("a subcommand is required (solve, bps, sweep, verify, plot)")
        opts = _resolve(ns, beta_list=ns.command == "sweep")
        if ns.command == "solve":
            return cmd_solve(opts)
        if ns.command == "bps":
            return cmd_bps(opts)
        if ns.command == "sweep":
            return cmd_sweep(opts)
        if ns.command == "verify":
            return cmd_verify(opts, ns.profile)
        return cmd_plot(opts, ns.profile)
    except (UsageError, InvalidParameters) as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
