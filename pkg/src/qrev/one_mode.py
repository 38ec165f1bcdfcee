"""Closed-form one-mode reverse problem under pure loss.

Everything here is a function of the squeezed-thermal target
``Gamma0 = diag(nu e^{2r}, nu e^{-2r})`` and the loss rate ``gamma``; the
central quantity is the anti-squeezing ratio ``x = cosh(2r)/nu``.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError
from .gaussian import (
    GaussianGenerator,
    SqueezedThermalParams,
    cp_matrix,
    cp_min_eig,
    squeezed_thermal,
)
from .symplectic import TOL_PSD, symplectic_form

_SIGMA = symplectic_form(1)


def branch_cost(x, nu, gamma=1.0):
    """Minimal reverse cost ``4 gamma |x - 1| / (nu - sgn(x - 1))``.

    Vectorized over ``x`` and ``nu``. Returns ``inf`` where the ``x > 1``
    branch meets ``nu = 1`` (pure nonclassical target).
    """
    x = np.asarray(x, dtype=float)
    nu = np.asarray(nu, dtype=float)
    sgn = np.sign(x - 1.0)
    denom = nu - sgn
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sgn == 0, 0.0, 4.0 * gamma * np.abs(x - 1.0) / denom)
    z = np.where((sgn > 0) & (denom <= 0), np.inf, z)
    return z if z.ndim else float(z)


def bayes_generator(params: SqueezedThermalParams, gamma: float) -> GaussianGenerator:
    """Fixed-diffusion Bayes reverse: ``K = -gamma I + 2 gamma Gamma0^{-1}``, ``D = 2 gamma I``.

    The drift carries the forward-time sign. Its time-reversed counterpart
    ``(-K, D)`` is the one that satisfies :func:`~qrev.gaussian.matching_residual`;
    both have the same CP spectrum because that spectrum is ``2 gamma +- Tr K``.
    """
    Gi = np.linalg.inv(squeezed_thermal(params))
    eye = np.eye(2)
    return GaussianGenerator(K=-gamma * eye + 2.0 * gamma * Gi, D=2.0 * gamma * eye, gamma=gamma)


def bayes_cp_margin(params: SqueezedThermalParams, gamma: float) -> float:
    """``u^H M_Bayes u = 4 gamma (1 - x)`` for ``u = (1, i)/sqrt(2)``.

    This is the CP-deciding eigenvalue of ``M_Bayes``. The other eigenvalue is
    ``4 gamma x``, so the smallest eigenvalue is ``4 gamma min(x, 1 - x)``.
    """
    return 4.0 * gamma * (1.0 - params.x)


def bayes_min_eig_closed_form(params: SqueezedThermalParams, gamma: float) -> float:
    x = params.x
    return 4.0 * gamma * min(x, 1.0 - x)


@dataclass(frozen=True)
class ReverseOptimum:
    z_min: float
    branch: int
    d_opt: np.ndarray
    k_opt: np.ndarray
    dual_witness: np.ndarray
    gamma: float

    @property
    def generator(self) -> GaussianGenerator:
        return GaussianGenerator(K=self.k_opt, D=self.d_opt, gamma=self.gamma)


def witness(params: SqueezedThermalParams, sign: int) -> np.ndarray:
    """Rank-one ``W_+- = Gamma0^{-1} +- (i/nu) sigma``."""
    vq, vp = params.variances
    nu = params.nu
    return np.array([[1.0 / vq, sign * 1j / nu], [-sign * 1j / nu, 1.0 / vp]])


def dual_witness(params: SqueezedThermalParams) -> np.ndarray:
    """Active dual optimizer: ``nu W_+/(nu-1)`` if x > 1 else ``nu W_-/(nu+1)``."""
    nu = params.nu
    if params.x > 1.0:
        if nu <= 1.0:
            raise DivergenceError("dual witness diverges for a pure squeezed target")
        return nu / (nu - 1.0) * witness(params, +1)
    return nu / (nu + 1.0) * witness(params, -1)


def matched_drift(params: SqueezedThermalParams, gamma: float, D: np.ndarray) -> np.ndarray:
    """Diagonal drift that makes ``(K, D)`` reverse the loss flow exactly at Gamma0.

    Off-diagonal drift is set to zero; complete positivity only sees ``Tr K``.
    """
    vq, vp = params.variances
    a, b = D[0, 0], D[1, 1]
    return np.diag([
        gamma * (1.0 - 1.0 / vq) - a / (2.0 * vq),
        gamma * (1.0 - 1.0 / vp) - b / (2.0 * vp),
    ])


def z_min_exact(params: SqueezedThermalParams, gamma: float) -> ReverseOptimum:
    """Exact minimum of ``Tr(Gamma0^{-1} D)`` over CP reverse generators matching at Gamma0."""
    x, nu = params.x, params.nu
    branch = int(np.sign(x - 1.0))
    if branch > 0 and nu <= 1.0:
        raise DivergenceError(
            f"reverse cost diverges for a pure squeezed target (nu={nu}, r={params.r})"
        )
    z = branch_cost(x, nu, gamma)
    Gamma0 = squeezed_thermal(params)
    d_opt = 0.5 * z * Gamma0
    return ReverseOptimum(
        z_min=z,
        branch=branch,
        d_opt=d_opt,
        k_opt=matched_drift(params, gamma, d_opt),
        dual_witness=dual_witness(params),
        gamma=gamma,
    )


def sdp_constraint_matrices(params: SqueezedThermalParams, gamma: float):
    """``(A0, A1, A2, A3)`` with ``M(D) = A0 + a A1 + b A2 + c A3``."""
    vq, vp = params.variances
    A0 = 2.0 * gamma * (1.0 - params.x) * np.array([[0.0, 1j], [-1j, 0.0]])
    A1 = np.array([[1.0, -1j / (2 * vq)], [1j / (2 * vq), 0.0]])
    A2 = np.array([[0.0, -1j / (2 * vp)], [1j / (2 * vp), 1.0]])
    A3 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    return A0, A1, A2, A3


KKT_THRESHOLDS = {
    "primal": 1e-10,
    "dual_psd": 1e-10,
    "dual_trace": 1e-10,
    "gap": 1e-10,
    "slackness": 1e-8,
    "alignment": 1e-12,
}


@dataclass
class KKTCertificate:
    primal_min_eig: float
    dual_min_eig: float
    dual_rank_det: float
    trace_residuals: tuple
    primal_value: float
    dual_value: float
    duality_gap: float
    slackness: float
    alignment: float
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def kkt_certificate(opt: ReverseOptimum, params: SqueezedThermalParams, gamma: float,
                    thresholds: dict | None = None) -> KKTCertificate:
    """Check primal/dual feasibility, zero gap and complementary slackness.

    Thresholds are absolute in units of ``gamma`` except slackness, which is
    relative to ``|M| |Y|``. Failures are listed in ``violations``.
    """
    th = dict(KKT_THRESHOLDS)
    th.update(thresholds or {})
    vq, vp = params.variances
    A0, A1, A2, A3 = sdp_constraint_matrices(params, gamma)
    Y = opt.dual_witness
    M = cp_matrix(opt.generator)

    primal = float(np.linalg.eigvalsh(M)[0])
    dual_eigs = np.linalg.eigvalsh(Y)
    res = (
        float(abs(np.trace(A1 @ Y) - 1.0 / vq)),
        float(abs(np.trace(A2 @ Y) - 1.0 / vp)),
        float(abs(np.trace(A3 @ Y))),
    )
    dual_value = float(np.real(-np.trace(A0 @ Y)))
    gap = abs(opt.z_min - dual_value)
    scale = np.linalg.norm(M) * np.linalg.norm(Y)
    slack = float(np.linalg.norm(M @ Y) / scale) if scale > 0 else 0.0
    D = opt.d_opt
    align = max(abs(D[0, 1]), abs(D[0, 0] / vq - D[1, 1] / vp))

    cert = KKTCertificate(
        primal_min_eig=primal,
        dual_min_eig=float(dual_eigs[0]),
        dual_rank_det=float(np.real(np.linalg.det(Y))),
        trace_residuals=res,
        primal_value=opt.z_min,
        dual_value=dual_value,
        duality_gap=gap,
        slackness=slack,
        alignment=float(align),
    )
    g = max(gamma, 1e-300)
    if primal < -th["primal"] * g * max(1.0, np.linalg.norm(M)):
        cert.violations.append(("primal", primal))
    if dual_eigs[0] < -th["dual_psd"] * max(1.0, np.linalg.norm(Y)):
        cert.violations.append(("dual_psd", float(dual_eigs[0])))
    for name, r in zip(("trace_q", "trace_p", "trace_c"), res):
        if r > th["dual_trace"]:
            cert.violations.append((name, r))
    if gap > th["gap"] * g:
        cert.violations.append(("gap", gap))
    if slack > th["slackness"]:
        cert.violations.append(("slackness", slack))
    if align > th["alignment"] * max(1.0, opt.z_min):
        cert.violations.append(("alignment", float(align)))
    return cert


def scalar_block_optimum(s: float, nu: float) -> tuple[float, float]:
    """Cheapest diffusion ``c I`` for one Williamson block with reverse source ``s``.

    Feasibility is ``c >= |s - c| / nu``; returns ``(c_min, 2 c_min / nu)``.
    """
    if s >= 0:
        c = s / (nu + 1.0)
    else:
        if nu <= 1.0:
            raise DivergenceError(f"negative source {s} on a pure block (nu={nu})")
        c = -s / (nu - 1.0)
    return c, 2.0 * c / nu


def petz_diffusion(params: SqueezedThermalParams, gamma: float) -> np.ndarray:
    nu, r = params.nu, params.r
    if nu <= 1.0:
        raise DivergenceError("Petz diffusion diverges for nu = 1")
    dq = 2.0 * gamma * (nu - np.exp(2 * r)) ** 2 / (nu**2 - 1.0)
    dp = 2.0 * gamma * (nu - np.exp(-2 * r)) ** 2 / (nu**2 - 1.0)
    return np.diag([dq, dp])


def petz_cost(params: SqueezedThermalParams, gamma: float) -> tuple[float, np.ndarray]:
    """Reverse cost of the local Gaussian Petz reverse from its diffusion entries."""
    D = petz_diffusion(params, gamma)
    vq, vp = params.variances
    return float(D[0, 0] / vq + D[1, 1] / vp), D


def petz_cost_contracted(params: SqueezedThermalParams, gamma: float) -> float:
    """Scalar contraction ``4 gamma [x (nu^2 + 1) - 2] / (nu^2 - 1)`` of the Petz entries."""
    nu, x = params.nu, params.x
    return 4.0 * gamma * (x * (nu**2 + 1.0) - 2.0) / (nu**2 - 1.0)


def petz_cost_alt_contraction(params: SqueezedThermalParams, gamma: float) -> float:
    """``4 gamma [x (nu^2 + 1) - 2 nu] / (nu^2 - 1)``, kept for the verification report.

    Disagrees with the diffusion entries (e.g. negative at r=0, nu=3); the
    entrywise value from :func:`petz_cost` is authoritative.
    """
    nu, x = params.nu, params.x
    return 4.0 * gamma * (x * (nu**2 + 1.0) - 2.0 * nu) / (nu**2 - 1.0)


def petz_gap_formula(params: SqueezedThermalParams, gamma: float) -> float:
    c = np.cosh(2 * params.r)
    nu = params.nu
    if c <= nu:
        return 4.0 * gamma * (c - 1.0) / (nu - 1.0)
    return 4.0 * gamma * (c + 1.0) / (nu + 1.0)


@dataclass(frozen=True)
class ProtocolCost:
    """Cost of a restricted reverse protocol; ``z is None`` marks infeasibility.

    ``margin`` is the best smallest CP eigenvalue reachable within the
    protocol family (non-negative when feasible).
    """

    z: float | None
    margin: float

    @property
    def feasible(self) -> bool:
        return self.z is not None


def bayes_cost(params: SqueezedThermalParams, gamma: float, tol_psd: float = TOL_PSD) -> ProtocolCost:
    """Bayes cost ``Tr(Gamma0^{-1} 2 gamma I) = 4 gamma x`` when CP-feasible."""
    margin = cp_min_eig(bayes_generator(params, gamma))
    if margin < -tol_psd * gamma:
        return ProtocolCost(None, margin)
    return ProtocolCost(4.0 * gamma * params.x, margin)


def isotropic_optimum(params: SqueezedThermalParams, gamma: float) -> ProtocolCost:
    """Best matched protocol with ``D = c I``.

    The CP matrix is ``[[c, i tau], [-i tau, c]]`` with
    ``tau = 2 gamma (1 - x) - c x``. For ``x > 1`` no ``c >= 0`` works and the
    best reachable margin is ``-2 gamma (x - 1)`` at ``c = 0``.
    """
    x = params.x
    if x > 1.0:
        return ProtocolCost(None, -2.0 * gamma * (x - 1.0))
    c = 2.0 * gamma * (1.0 - x) / (1.0 + x)
    return ProtocolCost(2.0 * c * x, 0.0)


@dataclass(frozen=True)
class ProtocolComparison:
    z_exact: float
    bayes: ProtocolCost
    isotropic: ProtocolCost
    z_petz: float
    petz_gap: float


def compare_protocols(params: SqueezedThermalParams, gamma: float) -> ProtocolComparison:
    z = z_min_exact(params, gamma).z_min
    zp, _ = petz_cost(params, gamma)
    return ProtocolComparison(
        z_exact=z,
        bayes=bayes_cost(params, gamma),
        isotropic=isotropic_optimum(params, gamma),
        z_petz=zp,
        petz_gap=zp - z,
    )


def gkp_benchmark(nbar: float, gamma: float) -> tuple[float, float]:
    """Optimal isotropic diffusion rate and round-trip variance amplification for ``nu = 2 nbar + 1``."""
    if nbar < 0:
        raise ValueError(f"nbar must be non-negative, got {nbar}")
    return 2.0 * gamma * nbar / (nbar + 1.0), (2.0 * nbar + 1.0) / (nbar + 1.0)
