"""Brute-force numerical oracles for the one-mode reverse SDP.

Nothing here imports the closed-form module. The primal problem is

    minimize   a/v_q + b/v_p
    subject to A0 + a A1 + b A2 + c A3 >= 0

with feasibility decided by explicit Hermitian eigenvalues.

The grid oracle fixes ``c = 0``. This loses nothing: ``c`` enters only the
off-diagonal real part, so ``det M = ab - c^2 - tau^2`` with ``tau``
independent of ``c``, and any ``c != 0`` can only shrink the feasible set.
"""
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import UnphysicalStateError

TOL_ORACLE = 1e-8
C_ZERO_SOUNDNESS = (
    "c enters M only through Re(M_qp); det M = ab - c^2 - tau^2 with tau independent "
    "of c, so c = 0 is weakly optimal"
)


@dataclass(frozen=True)
class SdpInstance:
    v_q: float
    v_p: float
    gamma: float = 1.0

    def __post_init__(self):
        if self.v_q <= 0 or self.v_p <= 0:
            raise ValueError("quadrature variances must be positive")
        if self.v_q * self.v_p < 1.0 - 1e-12:
            raise UnphysicalStateError(f"v_q v_p = {self.v_q * self.v_p} is below the vacuum bound 1")

    @classmethod
    def squeezed_thermal(cls, nu: float, r: float, gamma: float = 1.0) -> "SdpInstance":
        return cls(nu * np.exp(2 * r), nu * np.exp(-2 * r), gamma)

    @property
    def x(self) -> float:
        # Tr(Gamma0^{-1}) / 2
        return 0.5 * (1.0 / self.v_q + 1.0 / self.v_p)

    @property
    def nu(self) -> float:
        return float(np.sqrt(self.v_q * self.v_p))

    @cached_property
    def _mats(self):
        vq, vp, g = self.v_q, self.v_p, self.gamma
        A0 = 2 * g * (1 - self.x) * np.array([[0, 1j], [-1j, 0]])
        A1 = np.array([[1, -1j / (2 * vq)], [1j / (2 * vq), 0]])
        A2 = np.array([[0, -1j / (2 * vp)], [1j / (2 * vp), 1]])
        A3 = np.array([[0, 1], [1, 0]], dtype=complex)
        for A in (A0, A1, A2, A3):
            A.setflags(write=False)
        return A0, A1, A2, A3

    def matrices(self):
        """Return ``(A0, A1, A2, A3)``."""
        return self._mats

    def scalar_min_eig(self, a: float, b: float, c: float = 0.0) -> float:
        """Smallest eigenvalue of ``M(a, b, c)`` from the 2x2 Hermitian formula."""
        A0, A1, A2, _ = self._mats
        beta = A0[0, 1].imag + a * A1[0, 1].imag + b * A2[0, 1].imag
        lam_max = 0.5 * (a + b) + math.hypot(0.5 * (a - b), c, beta)
        if lam_max <= 0.0:
            return 0.5 * (a + b) - math.hypot(0.5 * (a - b), c, beta)
        # det / lam_max avoids cancelling two nearly equal terms
        return (a * b - c * c - beta * beta) / lam_max

    def constraint(self, a, b, c=0.0) -> np.ndarray:
        """``M(a, b, c)``, broadcasting over array arguments (trailing 2x2)."""
        A0, A1, A2, A3 = self.matrices()
        a, b, c = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c)))
        return (A0 + a[..., None, None] * A1 + b[..., None, None] * A2
                + c[..., None, None] * A3)

    def min_eig(self, a, b, c=0.0):
        """Smallest eigenvalue of ``M(a, b, c)``, vectorized closed form for 2x2 Hermitian."""
        A0, A1, A2, _ = self._mats
        a, b, c = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c)))
        beta = A0[0, 1].imag + a * A1[0, 1].imag + b * A2[0, 1].imag
        half_sum = 0.5 * (a + b)
        rad = np.sqrt((0.5 * (a - b)) ** 2 + c * c + beta * beta)
        lam_max = half_sum + rad
        with np.errstate(divide="ignore", invalid="ignore"):
            stable = (a * b - c * c - beta * beta) / lam_max
        out = np.where(lam_max > 0, stable, half_sum - rad)
        return out if out.ndim else float(out)

    def objective(self, a, b):
        return np.asarray(a) / self.v_q + np.asarray(b) / self.v_p


@dataclass
class OracleResult:
    z_opt: float
    argmin: tuple
    method: str
    feasibility_margin: float
    alignment: float = np.nan  # max(|c|, |a/v_q - b/v_p|); zero on the covariance ray
    notes: list = field(default_factory=list)


def _result(inst, a, b, method, notes):
    return OracleResult(
        z_opt=float(inst.objective(a, b)),
        argmin=(float(a), float(b), 0.0),
        method=method,
        feasibility_margin=float(inst.min_eig(a, b)),
        alignment=float(abs(a / inst.v_q - b / inst.v_p)),
        notes=notes,
    )


def _best_feasible(inst, A, B, tol):
    """Lowest-objective feasible point; ties broken by (a, b)."""
    feas = inst.min_eig(A, B) >= -tol
    if not feas.any():
        return None
    a, b = A[feas], B[feas]
    z = inst.objective(a, b)
    i = np.lexsort((b, a, z))[0]
    return float(a[i]), float(b[i])


def _min_feasible_b(inst, a, b_hi, tol, iters=200):
    """Smallest b with ``lambda_min M(a, b, 0) >= 0``; ``None`` if even the peak is below ``-tol``.

    ``lambda_min`` is concave in ``b``, so the feasible b form an interval. Its
    peak is found by golden section and the lower end by bisection. The root
    is taken on the exact boundary so the line search sees the unrelaxed
    feasible set.
    """
    f = lambda b: inst.scalar_min_eig(a, b)
    lo, hi = 0.0, b_hi
    phi = (np.sqrt(5) - 1) / 2
    x1, x2 = hi - phi * (hi - lo), lo + phi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if hi - lo <= 1e-9 * max(1.0, hi):
            break
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + phi * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - phi * (hi - lo)
            f1 = f(x1)
    peak = 0.5 * (lo + hi)
    if f(0.0) >= 0.0:
        return 0.0
    f_peak = f(peak)
    if f_peak < -tol:
        return None
    level = min(0.0, f_peak)
    lo, hi = 0.0, peak
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) >= level:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    return hi


def _slope_refine(F, a0, rel_bracket=1e-6, rel_step=1e-5, iters=24):
    """Sharpen a golden-section minimizer by bisecting on the sign of a secant slope.

    Comparing function values resolves a flat minimum only to ~sqrt(eps);
    the slope ``F(a+h) - F(a-h)`` with a wide ``h`` locates it to ~eps/h.
    """
    if a0 <= 0.0:
        return a0
    h = rel_step * a0
    slope = lambda a: F(a + h)[0] - F(a - h)[0]
    lo, hi = a0 * (1 - rel_bracket), a0 * (1 + rel_bracket)
    s_lo, s_hi = slope(lo), slope(hi)
    if not (np.isfinite(s_lo) and np.isfinite(s_hi)) or s_lo > 0 or s_hi < 0:
        return a0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if slope(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _boundary_search(inst, a0, half_width, b_hi, tol):
    """Minimize ``a/v_q + b*(a)/v_p`` over a by golden section.

    The feasible set is convex, so the lower boundary ``b*(a)`` is convex and so
    is the objective along it. The bracket is widened whenever the minimum
    lands on an edge.
    """
    def F(a):
        b = _min_feasible_b(inst, a, b_hi, tol)
        return (np.inf, None) if b is None else (a / inst.v_q + b / inst.v_p, b)

    lo, hi = max(0.0, a0 - half_width), a0 + half_width
    phi = (np.sqrt(5) - 1) / 2
    for _widen in range(12):
        l, h = lo, hi
        x1, x2 = h - phi * (h - l), l + phi * (h - l)
        f1, f2 = F(x1)[0], F(x2)[0]
        for _ in range(200):
            if h - l <= 1e-9 * max(1.0, h):
                break
            if f1 <= f2:
                h, x2, f2 = x2, x1, f1
                x1 = h - phi * (h - l)
                f1 = F(x1)[0]
            else:
                l, x1, f1 = x1, x2, f2
                x2 = l + phi * (h - l)
                f2 = F(x2)[0]
        a_best = 0.5 * (l + h)
        width = hi - lo
        at_low = a_best - lo < 1e-3 * width and lo > 0.0
        at_high = hi - a_best < 1e-3 * width
        if not (at_low or at_high):
            break
        lo = max(0.0, lo - width) if at_low else lo
        hi = hi + width if at_high else hi
    a_best = _slope_refine(F, a_best)
    z, b = F(a_best)
    if b is None:
        return None
    # a = 0 edge is feasible-checked separately since golden section never probes it
    z0, b0 = F(0.0)
    if b0 is not None and z0 < z:
        return 0.0, b0
    return a_best, b


def solve_primal_grid(inst: SdpInstance, grid_resolution: int = 64, refinement_rounds: int = 6,
                      tol: float = TOL_ORACLE, max_growth: int = 2**10) -> OracleResult:
    """Exhaustive grid over ``(a, b)`` at ``c = 0``, zoomed in ``refinement_rounds`` times,
    then polished by a line search along the exact feasibility boundary.

    The initial box is ``[0, L v_q] x [0, L v_p]`` with
    ``L = 8 gamma max(1, x)``; it grows 4x (up to ``max_growth``) until a
    feasible grid point exists.
    """
    if grid_resolution < 64:
        raise ValueError("grid_resolution must be at least 64")
    notes = [C_ZERO_SOUNDNESS]
    L = 8.0 * inst.gamma * max(1.0, inst.x)
    growth = 1
    while True:
        a_axis = np.linspace(0.0, L * growth * inst.v_q, grid_resolution + 1)
        b_axis = np.linspace(0.0, L * growth * inst.v_p, grid_resolution + 1)
        A, B = np.meshgrid(a_axis, b_axis, indexing="ij")
        best = _best_feasible(inst, A.ravel(), B.ravel(), tol)
        if best is not None:
            break
        growth *= 4
        if growth > max_growth:
            notes.append("no feasible grid point within the growth cap")
            return OracleResult(np.inf, (np.nan, np.nan, 0.0), "grid", -np.inf, notes=notes)
    if growth > 1:
        notes.append(f"box grown x{growth}")

    ha, hb = a_axis[1], b_axis[1]
    for _ in range(refinement_rounds):
        a0, b0 = best
        a_axis = np.clip(np.linspace(a0 - 2 * ha, a0 + 2 * ha, grid_resolution + 1), 0.0, None)
        b_axis = np.clip(np.linspace(b0 - 2 * hb, b0 + 2 * hb, grid_resolution + 1), 0.0, None)
        A, B = np.meshgrid(a_axis, b_axis, indexing="ij")
        cand = _best_feasible(inst, np.append(A.ravel(), a0), np.append(B.ravel(), b0), tol)
        if cand is not None:
            best = cand
        ha, hb = 4 * ha / grid_resolution, 4 * hb / grid_resolution

    b_hi = 4.0 * (best[1] + L * growth * inst.v_p)
    polished = _boundary_search(inst, best[0], max(best[0], L * growth * inst.v_q / grid_resolution),
                                b_hi, tol)
    # the polish is a convergent search seeded by the grid optimum; keep it whenever feasible
    if polished is not None and inst.scalar_min_eig(*polished) >= -tol:
        best = polished
    return _result(inst, *best, "grid", notes)


def level_set_feasible(inst: SdpInstance, Z: float, samples: int = 4001, tol: float = 0.0) -> bool:
    """Is some ``(a, b) >= 0`` with ``a/v_q + b/v_p = Z`` feasible?

    Samples the segment densely and compares the largest ``ab`` with
    ``tau(Z)^2``, ``tau(Z) = 2 gamma (1 - x) - Z/2``.
    """
    theta = np.linspace(0.0, 1.0, samples)
    a = inst.v_q * Z * theta
    b = inst.v_p * Z * (1.0 - theta)
    tau = 2 * inst.gamma * (1 - inst.x) - 0.5 * Z
    return bool(np.max(a * b) - tau**2 >= -tol)


def solve_primal_bisection(inst: SdpInstance, tol: float = 1e-10, samples: int = 4001) -> OracleResult:
    """Smallest feasible objective level ``Z``, by bisection on the level-set test."""
    notes = [C_ZERO_SOUNDNESS + " (level sets are taken at c = 0)"]
    lo, hi = 0.0, inst.gamma
    if level_set_feasible(inst, 0.0, samples):
        hi = 0.0
    else:
        while not level_set_feasible(inst, hi, samples):
            lo, hi = hi, 2.0 * hi
            if hi > 1e300:
                raise ArithmeticError("no feasible level found")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if level_set_feasible(inst, mid, samples):
            hi = mid
        else:
            lo = mid
    Z = hi
    theta = np.linspace(0.0, 1.0, samples)
    prod = theta * (1.0 - theta)
    th = theta[np.argmax(prod)]
    res = _result(inst, inst.v_q * Z * th, inst.v_p * Z * (1.0 - th), "bisection", notes)
    res.z_opt = float(Z)
    return res


@dataclass
class DualReport:
    value: float
    min_eig: float
    residuals: dict
    feasible: bool


def verify_dual(inst: SdpInstance, Y: np.ndarray, tol: float = 1e-10) -> DualReport:
    """Dual feasibility of ``Y`` and its lower bound ``-Tr(A0 Y)``."""
    Y = np.asarray(Y, dtype=complex)
    if np.linalg.norm(Y - Y.conj().T) > 1e-12 * max(1.0, np.linalg.norm(Y)):
        raise ValueError("Y must be Hermitian")
    A0, A1, A2, A3 = inst.matrices()
    residuals = {
        "trace_A1": float(abs(np.trace(A1 @ Y) - 1.0 / inst.v_q)),
        "trace_A2": float(abs(np.trace(A2 @ Y) - 1.0 / inst.v_p)),
        "trace_A3": float(abs(np.trace(A3 @ Y))),
    }
    m = float(np.linalg.eigvalsh(Y)[0])
    feasible = m >= -tol * max(1.0, np.linalg.norm(Y)) and all(v <= tol for v in residuals.values())
    return DualReport(
        value=float(np.real(-np.trace(A0 @ Y))),
        min_eig=m,
        residuals=residuals,
        feasible=feasible,
    )
