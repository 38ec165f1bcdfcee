"""``qrev`` command line: figure datasets and the verification suite.

Exit codes: 0 success, 1 verification failure, 2 I/O or configuration error.
"""
import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from .datasets import INFEASIBLE, Dataset, write_dataset
from .errors import DivergenceError, QrevError, SpecFormatError
from .frame import additive_bound, build_moving_frame, multimode_optimum
from .gaussian import SqueezedThermalParams, cp_min_eig
from .one_mode import (
    bayes_generator,
    branch_cost,
    compare_protocols,
    petz_cost_alt_contraction,
)
from .overlay import BUILTIN_OVERLAY, OVERLAY_VERSION
from .statespec import load_state_spec
from .verify import SUBSETS, TOLERANCES, run_verification

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    gamma: float = 1.0
    out: Path = Path(".")
    fmt: str = "csv"
    tolerances: dict = field(default_factory=lambda: dict(TOLERANCES))
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ConfigError(f"--gamma must be positive, got {self.gamma}")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.fmt!r}")


def _range(vals, name, lo_bound=None):
    lo, hi = vals
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
        raise ConfigError(f"{name}: empty or invalid range [{lo}, {hi}]")
    if lo_bound is not None and lo < lo_bound:
        raise ConfigError(f"{name}: lower end must be >= {lo_bound}")
    return float(lo), float(hi)


def _points(n, name):
    if n < 2:
        raise ConfigError(f"{name}: need at least 2 points, got {n}")
    return n


def _cost_cell(z):
    return float(z) if z is not None else INFEASIBLE


def _emit(cfg, datasets):
    paths = []
    for ds in datasets:
        paths.append(write_dataset(ds, cfg.out, cfg.fmt))
    for p in paths:
        print(p)
    return EXIT_OK


# ---------------------------------------------------------------- commands

def phase_diagram_datasets(cfg, r_range=(0.0, 2.0), nu_range=(1.0, 12.0), n_r=100, n_nu=100):
    g = cfg.gamma
    tol_psd = cfg.tolerances["bayes_psd"] * g
    rs = np.linspace(*r_range, n_r)
    nus = np.linspace(*nu_range, n_nu)
    bayes_rows, z_rows = [], []
    for r in rs:
        for nu in nus:
            p = SqueezedThermalParams(float(nu), float(r))
            m = cp_min_eig(bayes_generator(p, g))
            bayes_rows.append((float(r), float(nu), p.x, m, bool(m >= -tol_psd)))
            z = branch_cost(p.x, nu, g)
            z_rows.append((float(r), float(nu), p.x, int(np.sign(p.x - 1.0)), float(z)))
    r_top = min(r_range[1], 0.5 * np.arccosh(nu_range[1]))
    r_lo = max(r_range[0], 0.5 * np.arccosh(max(nu_range[0], 1.0)))
    boundary = []
    for r in np.linspace(r_lo, r_top, n_r):
        nu_b = float(np.cosh(2 * r))
        boundary.append((float(r), nu_b, float(branch_cost(np.cosh(2 * r) / nu_b, nu_b, g))))
    overlay = [(pt.label, pt.s_db, pt.a_db, pt.r, pt.nu, pt.x, bool(pt.nu < np.cosh(2 * pt.r)),
                OVERLAY_VERSION) for pt in BUILTIN_OVERLAY]
    return [
        Dataset("phase_bayes", ("r", "nu", "x", "bayes_min_eig", "bayes_cp_feasible"), bayes_rows),
        Dataset("phase_zmin", ("r", "nu", "x", "branch", "z_min"), z_rows),
        Dataset("phase_boundary", ("r", "nu_boundary", "z_min"), boundary),
        Dataset("overlay", ("label", "s_db", "a_db", "r", "nu", "x", "below_boundary",
                            "overlay_version"), overlay),
    ]


def comparison_dataset(cfg, nu, r_range=(0.0, 2.0), n_r=201):
    if not nu > 1:
        raise ConfigError(f"--nu must be > 1, got {nu}")
    g = cfg.gamma
    rows = []
    for r in np.linspace(*r_range, n_r):
        p = SqueezedThermalParams(float(nu), float(r))
        c = compare_protocols(p, g)
        rows.append((float(r), p.x, c.z_exact, _cost_cell(c.bayes.z), _cost_cell(c.isotropic.z),
                     c.z_petz, c.petz_gap, c.bayes.feasible, c.isotropic.feasible,
                     float(c.bayes.margin), float(c.isotropic.margin),
                     petz_cost_alt_contraction(p, g)))
    cols = ("r", "x", "z_exact", "z_bayes", "z_isotropic", "z_petz", "petz_gap", "bayes_feasible",
            "isotropic_feasible", "bayes_margin", "isotropic_margin", "z_petz_contracted_display")
    return Dataset("protocol_comparison", cols, rows)


def pure_endpoint_datasets(cfg, r_list, t_min=1e-7, t_max=1e-1, per_decade=40):
    g = cfg.gamma
    if any(not r > 0 for r in r_list):
        raise ConfigError("--r values must be positive")
    if not 0 < t_min < t_max:
        raise ConfigError("need 0 < t-min < t-max")
    decades = np.log10(t_max / t_min)
    t = np.logspace(np.log10(t_min / g), np.log10(t_max / g), int(round(per_decade * decades)) + 1)
    rows, fits = [], []
    for r in r_list:
        c = asy.pure_endpoint_curve(r, g, t)
        rows += [(float(r), float(ti), float(zi), float(tzi), float(2.0 / ti))
                 for ti, zi, tzi in zip(c.t, c.z_min, c.tz)]
        fits.append((float(r), c.fitted_coefficient, c.fitted_slope))
    return [
        Dataset("pure_endpoint", ("r", "t", "z_min", "t_z_min", "ref_2_over_t"), rows),
        Dataset("pure_endpoint_fit", ("r", "fitted_coefficient", "fitted_slope"), fits),
    ]


def multimode_dataset(cfg, spec, t_range=(0.05, 2.0), n_t=200):
    g = cfg.gamma
    times = np.linspace(*t_range, n_t) / g
    frame = build_moving_frame(spec.covariance(), g, times)
    n = frame.n_modes
    cols = (("t",) + tuple(f"nu_{k + 1}" for k in range(n)) + tuple(f"x_star_{k + 1}" for k in range(n))
            + tuple(f"cost_{k + 1}" for k in range(n))
            + ("total", "additive_bound", "cp_margin", "matching_residual"))
    rows = []
    for i, t in enumerate(times):
        nu = frame.nu[i]
        try:
            opt = multimode_optimum(frame, i)
            x, costs = opt.x_star, opt.mode_costs
            tail = (opt.total, additive_bound(x, nu, g), opt.cp_margin, opt.matching_residual)
        except DivergenceError:
            x = frame.x_star[i]
            costs = np.full(n, np.inf)
            tail = (np.inf, additive_bound(x, nu, g), np.nan, np.nan)
        rows.append((float(t),) + tuple(map(float, nu)) + tuple(map(float, x))
                    + tuple(map(float, costs)) + tuple(map(float, tail)))
    return Dataset("multimode", cols, rows)


def verify_report(cfg, subset):
    report, ok = run_verification(cfg.gamma, subset, cfg.overrides)
    path = Path(cfg.out) / "verify_report.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(report, indent=1, sort_keys=True) + "\n")
    for c in report["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}  value={c['value']}  limit={c['limit']}")
    print(path)
    if not ok:
        print(f"verification failed: {report['first_failure']}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _tol_override(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    name, value = text.split("=", 1)
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {name!r}: not a number: {value!r}") from None


def _global_flags(p, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--gamma", type=float, default=d(1.0), help="loss rate (default 1)")
    p.add_argument("--out", default=d("."), help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default=d("csv"), dest="fmt")
    p.add_argument("--tol-override", type=_tol_override, action="append", default=d([]),
                   dest="tol_override", metavar="NAME=VALUE")


def build_parser():
    parser = argparse.ArgumentParser(prog="qrev", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phase-diagram", parents=[common], help="Bayes CP and Z_min grids over (r, nu)")
    p.add_argument("--r-range", type=float, nargs=2, default=(0.0, 2.0))
    p.add_argument("--nu-range", type=float, nargs=2, default=(1.0, 12.0))
    p.add_argument("--r-points", type=int, default=100)
    p.add_argument("--nu-points", type=int, default=100)

    p = sub.add_parser("compare", parents=[common], help="protocol costs along r at fixed nu")
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--r-range", type=float, nargs=2, default=(0.0, 2.0))
    p.add_argument("--points", type=int, default=201)

    p = sub.add_parser("pure-endpoint", parents=[common], help="t Z_min(t) near a pure target")
    p.add_argument("--r", type=float, nargs="+", default=[0.5, 1.0, 1.5])
    p.add_argument("--t-min", type=float, default=1e-7, help="in units of 1/gamma")
    p.add_argument("--t-max", type=float, default=1e-1, help="in units of 1/gamma")
    p.add_argument("--per-decade", type=int, default=40)

    p = sub.add_parser("multimode", parents=[common], help="additive law along the loss path")
    p.add_argument("--spec", required=True)
    p.add_argument("--t-range", type=float, nargs=2, default=(0.05, 2.0), help="in units of 1/gamma")
    p.add_argument("--points", type=int, default=200)

    p = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    p.add_argument("--subset", choices=SUBSETS)
    return parser


def _config(args):
    overrides = dict(args.tol_override)
    unknown = sorted(set(overrides) - set(TOLERANCES))
    if unknown:
        raise ConfigError(f"unknown tolerance(s): {', '.join(unknown)}; known: {', '.join(sorted(TOLERANCES))}")
    tol = dict(TOLERANCES)
    tol.update(overrides)
    cfg = RunConfig(gamma=args.gamma, out=Path(args.out), fmt=args.fmt, tolerances=tol, overrides=overrides)
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {cfg.out}: {exc}") from exc
    return cfg


def run(args) -> int:
    cfg = _config(args)
    if args.command == "phase-diagram":
        return _emit(cfg, phase_diagram_datasets(
            cfg, _range(args.r_range, "--r-range"), _range(args.nu_range, "--nu-range", 1.0),
            _points(args.r_points, "--r-points"), _points(args.nu_points, "--nu-points")))
    if args.command == "compare":
        return _emit(cfg, [comparison_dataset(cfg, args.nu, _range(args.r_range, "--r-range"),
                                              _points(args.points, "--points"))])
    if args.command == "pure-endpoint":
        return _emit(cfg, pure_endpoint_datasets(cfg, args.r, args.t_min, args.t_max, args.per_decade))
    if args.command == "multimode":
        spec = load_state_spec(args.spec)
        return _emit(cfg, [multimode_dataset(cfg, spec, _range(args.t_range, "--t-range"),
                                             _points(args.points, "--points"))])
    if args.command == "verify":
        return verify_report(cfg, args.subset)
    raise ConfigError(f"unknown command {args.command}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except SpecFormatError as exc:
        print(f"qrev: {args.spec}: {exc}", file=sys.stderr)
    except (ConfigError, OSError, QrevError) as exc:
        print(f"qrev: {exc}", file=sys.stderr)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
