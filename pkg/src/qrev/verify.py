"""Invariant suite behind ``qrev verify``.

Every check compares one scalar against a named tolerance. Randomized checks
draw from fixed seeds, and reported values are rounded to 12 significant
digits, so two runs produce identical reports.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from . import asymptotics as asy
from .frame import (
    additive_bound,
    build_moving_frame,
    frame_jumps,
    kinematic_residual,
    multimode_optimum,
    total_costs,
)
from .gaussian import SqueezedThermalParams, cp_matrix, squeezed_thermal
from .one_mode import (
    bayes_cp_margin,
    bayes_generator,
    bayes_min_eig_closed_form,
    kkt_certificate,
    petz_cost,
    petz_cost_alt_contraction,
    petz_gap_formula,
    z_min_exact,
)
from .oracle import SdpInstance, solve_primal_bisection, solve_primal_grid, verify_dual
from .overlay import BUILTIN_OVERLAY
from .symplectic import min_eig_hermitian, symplectic_from_hamiltonian

REPORT_VERSION = 1
SEED = 20240611

TOLERANCES = {
    "bayes_margin": 1e-10,
    "bayes_psd": 1e-10,
    "kkt_gap": 1e-10,
    "kkt_slackness": 1e-8,
    "kkt_dual": 1e-10,
    "petz_gap": 1e-10,
    "petz_r0": 1e-12,
    "branch_ratio": 1e-6,
    "thermal_limit": 0.02,
    "zero_cost": 1e-12,
    "oracle_abs": 1e-4,
    "oracle_rel": 1e-3,
    "oracle_alignment": 1e-5,
    "weak_duality": 1e-4,
    "multimode_cost_rel": 1e-9,
    "multimode_cp": 1e-8,
    "multimode_matching": 1e-7,
    "frame_jump": 10.0,
    "crossing_continuity": 1e-6,
    "kinematic_ratio": 1.5,
    "one_mode_frame": 1e-9,
    "endpoint_coefficient": 0.01,
    "endpoint_tail": 0.005,
    "fluctuation_slope": 0.1,
    "action_drift": 0.05,
}

SUBSETS = ("one-mode", "oracle", "multimode", "asymptotics", "overlay")


@dataclass(frozen=True)
class CheckResult:
    name: str
    subset: str
    value: float
    limit: float
    passed: bool

    def as_dict(self):
        return {"name": self.name, "subset": self.subset, "value": _round(self.value),
                "limit": _round(self.limit), "passed": self.passed}


def _round(v):
    v = float(v)
    if not np.isfinite(v):
        return str(v)
    return float(format(v, ".12g"))


def _le(name, subset, value, limit):
    value = float(value)
    return CheckResult(name, subset, value, float(limit), bool(value <= limit))


# ---------------------------------------------------------------- one-mode

def bayes_grid(n_r=100, n_nu=100, gamma=1.0, r_max=2.0, nu_range=(1.0, 12.0)):
    """Numeric and closed-form Bayes CP data on an ``(r, nu)`` grid."""
    rs = np.linspace(0.0, r_max, n_r)
    nus = np.linspace(*nu_range, n_nu)
    min_eig = np.empty((n_r, n_nu))
    quad_form = np.empty_like(min_eig)
    margin = np.empty_like(min_eig)
    closed = np.empty_like(min_eig)
    u = np.array([1.0, 1j]) / np.sqrt(2.0)
    for i, r in enumerate(rs):
        for j, nu in enumerate(nus):
            p = SqueezedThermalParams(nu, r)
            M = cp_matrix(bayes_generator(p, gamma))
            min_eig[i, j] = min_eig_hermitian(M)
            quad_form[i, j] = np.real(u.conj() @ M @ u)
            margin[i, j] = bayes_cp_margin(p, gamma)
            closed[i, j] = bayes_min_eig_closed_form(p, gamma)
    return rs, nus, min_eig, quad_form, margin, closed


def threshold_misplacements(rs, nus, min_eig, tol_psd):
    """Grid points whose numeric CP sign disagrees with ``cosh 2r <= nu`` by more than one cell."""
    dr, dnu = rs[1] - rs[0], nus[1] - nus[0]
    R, N = np.meshgrid(rs, nus, indexing="ij")
    numeric = min_eig >= -tol_psd
    analytic = np.cosh(2 * R) <= N
    r_star = 0.5 * np.arccosh(np.maximum(N, 1.0))
    near = (np.abs(np.cosh(2 * R) - N) <= dnu) | (np.abs(R - r_star) <= dr)
    return int(np.count_nonzero((numeric != analytic) & ~near))


def random_params(rng, n, nu_range=(1.05, 12.0), r_range=(0.0, 2.0)):
    return [SqueezedThermalParams(float(rng.uniform(*nu_range)), float(rng.uniform(*r_range)))
            for _ in range(n)]


def one_mode_checks(tol, gamma=1.0, n_grid=100, n_kkt=100, n_petz=200):
    rng = np.random.default_rng(SEED)
    out = []
    rs, nus, me, qf, margin, closed = bayes_grid(n_grid, n_grid, gamma)
    out.append(_le("bayes_threshold_misplaced_cells", "one-mode",
                   threshold_misplacements(rs, nus, me, tol["bayes_psd"] * gamma), 0))
    out.append(_le("bayes_margin_vs_u_form", "one-mode",
                   np.max(np.abs(margin - qf)), tol["bayes_margin"] * gamma))
    out.append(_le("bayes_min_eig_vs_closed_form", "one-mode",
                   np.max(np.abs(me - closed)), tol["bayes_margin"] * gamma))

    gaps, slack, dual = [], [], []
    for p in random_params(rng, n_kkt):
        cert = kkt_certificate(z_min_exact(p, gamma), p, gamma)
        gaps.append(cert.duality_gap)
        slack.append(cert.slackness)
        dual.append(max(max(cert.trace_residuals), max(0.0, -cert.dual_min_eig)))
    out.append(_le("kkt_duality_gap", "one-mode", max(gaps), tol["kkt_gap"] * gamma))
    out.append(_le("kkt_slackness", "one-mode", max(slack), tol["kkt_slackness"]))
    out.append(_le("kkt_dual_residual", "one-mode", max(dual), tol["kkt_dual"]))

    err = 0.0
    for p in random_params(rng, n_petz):
        zp, _ = petz_cost(p, gamma)
        err = max(err, abs(zp - z_min_exact(p, gamma).z_min - petz_gap_formula(p, gamma)))
    out.append(_le("petz_gap_formula", "one-mode", err, tol["petz_gap"] * gamma))
    r0 = max(abs(petz_cost(SqueezedThermalParams(nu, 0.0), gamma)[0]
                 - z_min_exact(SqueezedThermalParams(nu, 0.0), gamma).z_min)
             for nu in np.linspace(1.05, 12.0, 50))
    out.append(_le("petz_gap_r0", "one-mode", r0, tol["petz_r0"] * gamma))
    # the contracted display is reported, not checked
    disp = petz_cost_alt_contraction(SqueezedThermalParams(3.0, 0.0), gamma)
    out.append(CheckResult("petz_display_minus_entrywise_r0_nu3 (report only)", "one-mode",
                           disp - petz_cost(SqueezedThermalParams(3.0, 0.0), gamma)[0], np.inf, True))

    worst = 0.0
    delta = 1e-3
    for nu in (1.5, 3.0, 10.0):
        hi = SqueezedThermalParams(nu, 0.5 * np.arccosh(nu * (1 + delta)))
        lo = SqueezedThermalParams(nu, 0.5 * np.arccosh(nu * (1 - delta)))
        ratio = z_min_exact(hi, gamma).z_min / z_min_exact(lo, gamma).z_min
        worst = max(worst, abs(ratio / ((nu + 1) / (nu - 1)) - 1.0))
    out.append(_le("branch_asymmetry_ratio", "one-mode", worst, tol["branch_ratio"]))

    # Z nu / 4 gamma = (nu - 1)/(nu + 1) exactly, so a 2% band is first reached at nu = 99
    scaled = {nu: z_min_exact(SqueezedThermalParams(nu, 0.0), gamma).z_min * nu / (4 * gamma)
              for nu in (50.0, 100.0, 1000.0, 1e4)}
    out.append(_le("thermal_scaled_cost_identity", "one-mode",
                   max(abs(v - (nu - 1) / (nu + 1)) for nu, v in scaled.items()), 1e-12))
    out.append(_le("thermal_limit_nu_ge_100", "one-mode",
                   max(abs(v - 1.0) for nu, v in scaled.items() if nu >= 100), tol["thermal_limit"]))

    r = rng.uniform(0.0, 2.0, 200)
    on = max(z_min_exact(SqueezedThermalParams(np.cosh(2 * ri), ri), gamma).z_min for ri in r)
    out.append(_le("zero_cost_on_boundary", "one-mode", on, tol["zero_cost"] * gamma))
    off = min(min(z_min_exact(SqueezedThermalParams(np.cosh(2 * ri) + s, ri), gamma).z_min
                  for s in (1e-3, -1e-3) if np.cosh(2 * ri) + s >= 1.0) for ri in r)
    out.append(CheckResult("zero_cost_off_boundary_positive", "one-mode", off, 0.0, bool(off > 0)))
    return out


# ---------------------------------------------------------------- oracle

def oracle_sweep(n_r=40, n_nu=40, gamma=1.0):
    """Closed form, grid oracle and bisection oracle on an ``(r, nu)`` grid."""
    rows = []
    for r in np.linspace(0.0, 2.0, n_r):
        for nu in np.linspace(1.05, 12.0, n_nu):
            p = SqueezedThermalParams(nu, r)
            inst = SdpInstance.squeezed_thermal(nu, r, gamma)
            opt = z_min_exact(p, gamma)
            g = solve_primal_grid(inst)
            b = solve_primal_bisection(inst)
            dual = verify_dual(inst, opt.dual_witness)
            rows.append((r, nu, opt.z_min, g, b, dual))
    return rows


def oracle_checks(tol, gamma=1.0, n=6):
    out = []
    err = agree = align = weak = 0.0
    for r, nu, z, g, b, dual in oracle_sweep(n, n, gamma):
        scale = max(tol["oracle_abs"] * gamma, tol["oracle_rel"] * z)
        err = max(err, abs(g.z_opt - z) / scale, abs(b.z_opt - z) / scale)
        agree = max(agree, abs(g.z_opt - b.z_opt) / (2 * scale))
        align = max(align, g.alignment)
        weak = max(weak, dual.value - min(g.z_opt, b.z_opt))
    out.append(_le("oracle_vs_closed_form (scaled)", "oracle", err, 1.0))
    out.append(_le("oracle_methods_agree (scaled)", "oracle", agree, 1.0))
    out.append(_le("oracle_argmin_alignment", "oracle", align, tol["oracle_alignment"]))
    out.append(_le("weak_duality", "oracle", weak, tol["weak_duality"] * gamma))
    return out


# ---------------------------------------------------------------- multimode

def random_mixed_state(rng, n_modes, nu_min=1.2, nu_max=5.0, r_max=1.0, coupling=0.4):
    """Product of squeezed-thermal modes conjugated by a random symplectic matrix."""
    nus = rng.uniform(nu_min, nu_max, n_modes)
    rs = rng.uniform(0.0, r_max, n_modes)
    G0 = block_diag(*[squeezed_thermal(SqueezedThermalParams(a, b)) for a, b in zip(nus, rs)])
    T = symplectic_from_hamiltonian(coupling * rng.normal(size=(2 * n_modes, 2 * n_modes)))
    return T @ G0 @ T.T


def crossing_fixture():
    """Modes (nu=4, r=0.3) and (nu=2, r=1.2): their symplectic eigenvalues cross under loss."""
    return block_diag(squeezed_thermal(SqueezedThermalParams(4.0, 0.3)),
                      squeezed_thermal(SqueezedThermalParams(2.0, 1.2)))


def crossing_time(Gamma0, gamma=1.0, lo=0.01, hi=2.0):
    from scipy.optimize import brentq
    from .gaussian import pure_loss_path

    def gap(t):
        G = pure_loss_path(Gamma0, gamma, t)
        return np.sqrt(np.linalg.det(G[:2, :2])) - np.sqrt(np.linalg.det(G[2:, 2:]))
    return brentq(gap, lo, hi, xtol=1e-15)


def attainment_metrics(frame):
    cost = cp = match = 0.0
    cp = np.inf
    for i in range(len(frame.times)):
        opt = multimode_optimum(frame, i)
        bound = additive_bound(opt.x_star, frame.nu[i], frame.gamma)
        cost = max(cost, abs(opt.total - bound) / max(bound, 1e-300))
        cp = min(cp, opt.cp_margin)
        match = max(match, opt.matching_residual)
    return cost, cp, match


def kinematic_ratio(Gamma0, gamma=1.0, t_range=(0.1, 1.1), n=101):
    res = []
    for m in (n, 2 * n - 1):
        f = build_moving_frame(Gamma0, gamma, np.linspace(*t_range, m) / gamma)
        res.append(max(kinematic_residual(f, i) for i in range(m)))
    return res[0] / res[1], res


def multimode_checks(tol, gamma=1.0, n_states=3, n_times=40):
    rng = np.random.default_rng(SEED + 1)
    out = []
    times = np.linspace(0.05, 2.0, n_times) / gamma
    cost = match = 0.0
    cp = np.inf
    for k in range(n_states):
        G0 = random_mixed_state(rng, 2 + k % 3)
        c, p, m = attainment_metrics(build_moving_frame(G0, gamma, times))
        cost, cp, match = max(cost, c), min(cp, p), max(match, m)
    out.append(_le("multimode_cost_vs_additive (rel)", "multimode", cost, tol["multimode_cost_rel"]))
    out.append(CheckResult("multimode_lab_cp_margin", "multimode", cp, -tol["multimode_cp"] * gamma,
                           bool(cp >= -tol["multimode_cp"] * gamma)))
    out.append(_le("multimode_matching_residual", "multimode", match, tol["multimode_matching"]))

    G0 = crossing_fixture()
    frame = build_moving_frame(G0, gamma, np.linspace(0.01, 2.0, 400) / gamma)
    out.append(_le("crossing_frame_jump_per_dt", "multimode", frame_jumps(frame).max(), tol["frame_jump"]))
    tc = crossing_time(G0, gamma)
    h = 1e-7 / gamma
    local = build_moving_frame(G0, gamma, np.array([tc - h, tc, tc + h]))
    z = total_costs(local)
    out.append(_le("crossing_total_cost_continuity", "multimode", abs(z[2] - z[0]),
                   tol["crossing_continuity"] * gamma))

    ratio, _ = kinematic_ratio(random_mixed_state(np.random.default_rng(SEED + 2), 2), gamma)
    f = tol["kinematic_ratio"]
    out.append(CheckResult("kinematic_residual_halving_ratio", "multimode", ratio, 2 * f,
                           bool(2 / f <= ratio <= 2 * f)))

    p = SqueezedThermalParams(3.0, 1.0)
    frame = build_moving_frame(squeezed_thermal(p), gamma, times)
    worst = 0.0
    for i in range(len(times)):
        G = frame.Gamma(i)
        pt = SqueezedThermalParams.from_covariance(G)
        worst = max(worst, abs(multimode_optimum(frame, i).total - z_min_exact(pt, gamma).z_min)
                    / max(1.0, z_min_exact(pt, gamma).z_min))
    out.append(_le("one_mode_frame_vs_closed_form", "multimode", worst, tol["one_mode_frame"]))
    return out


# ---------------------------------------------------------------- asymptotics

def asymptotics_checks(tol, gamma=1.0):
    out = []
    worst = tail = 0.0
    for r in (0.5, 1.0, 1.5):
        curve = asy.pure_endpoint_curve(r, gamma)
        worst = max(worst, abs(curve.fitted_coefficient - 2.0))
        tail = max(tail, abs(1e-5 / gamma * asy.endpoint_cost(r, gamma, 1e-5 / gamma) / 2.0 - 1.0))
    out.append(_le("endpoint_leading_coefficient", "asymptotics", worst, tol["endpoint_coefficient"]))
    out.append(_le("endpoint_tz_at_1e-5", "asymptotics", tail, tol["endpoint_tail"]))
    drift = max(abs(asy.action_remainder(r, gamma, 1e-6 / gamma, 1 / gamma)
                    - asy.action_remainder(r, gamma, 1e-5 / gamma, 1 / gamma)) for r in (0.5, 1.0, 1.5))
    out.append(_le("action_remainder_drift_1e-6_vs_1e-5", "asymptotics", drift, tol["action_drift"]))
    slope = max(abs(asy.fluctuation_slope(r, gamma)[0] - 1.0) for r in (0.5, 1.0, 1.5))
    out.append(_le("fluctuation_leading_slope", "asymptotics", slope, tol["fluctuation_slope"]))
    return out


def overlay_checks(tol, gamma=1.0):
    worst = min(pt.x for pt in BUILTIN_OVERLAY)
    return [CheckResult("overlay_min_x_above_1", "overlay", worst, 1.0, bool(worst > 1.0))]


_RUNNERS = {
    "one-mode": one_mode_checks,
    "oracle": oracle_checks,
    "multimode": multimode_checks,
    "asymptotics": asymptotics_checks,
    "overlay": overlay_checks,
}


def run_verification(gamma: float = 1.0, subset: str | None = None, overrides: dict | None = None):
    """Run the suite; returns ``(report dict, all passed)``."""
    tol = dict(TOLERANCES)
    for k, v in (overrides or {}).items():
        if k not in tol:
            raise KeyError(f"unknown tolerance {k!r}")
        tol[k] = float(v)
    names = SUBSETS if subset is None else (subset,)
    for s in names:
        if s not in _RUNNERS:
            raise KeyError(f"unknown subset {s!r}")
    checks = [c for s in names for c in _RUNNERS[s](tol, gamma)]
    failed = [c.name for c in checks if not c.passed]
    report = {
        "version": REPORT_VERSION,
        "gamma": _round(gamma),
        "subset": subset or "all",
        "tolerances": {k: _round(tol[k]) for k in sorted(tol)},
        "checks": [c.as_dict() for c in checks],
        "passed": not failed,
        "first_failure": failed[0] if failed else None,
    }
    return report, not failed
