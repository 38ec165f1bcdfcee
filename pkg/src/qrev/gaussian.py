"""Gaussian states, the pure-loss path, generators and the reverse cost."""
from dataclasses import dataclass

import numpy as np

from .errors import UnphysicalStateError
from .symplectic import TOL_HERM, TOL_POSDEF, TOL_PSD, min_eig_hermitian, n_modes_of, symplectic_form


@dataclass(frozen=True)
class SqueezedThermalParams:
    """One-mode squeezed-thermal state ``diag(nu e^{2r}, nu e^{-2r})``."""

    nu: float
    r: float

    def __post_init__(self):
        if not np.isfinite(self.nu) or not np.isfinite(self.r):
            raise UnphysicalStateError(f"non-finite parameters nu={self.nu}, r={self.r}")
        if self.nu < 1.0:
            raise UnphysicalStateError(f"nu must be >= 1, got {self.nu}")

    @property
    def x(self) -> float:
        """Anti-squeezing ratio cosh(2r)/nu."""
        return float(np.cosh(2.0 * self.r) / self.nu)

    @property
    def variances(self) -> tuple[float, float]:
        return self.nu * np.exp(2.0 * self.r), self.nu * np.exp(-2.0 * self.r)

    @classmethod
    def from_covariance(cls, Gamma: np.ndarray) -> "SqueezedThermalParams":
        """Parameters of a diagonal one-mode covariance matrix."""
        Gamma = np.asarray(Gamma, dtype=float)
        if Gamma.shape != (2, 2) or abs(Gamma[0, 1]) > TOL_HERM * np.abs(Gamma).max():
            raise ValueError("expected a diagonal 2x2 covariance matrix")
        vq, vp = Gamma[0, 0], Gamma[1, 1]
        return cls(nu=float(np.sqrt(vq * vp)), r=float(0.25 * np.log(vq / vp)))


def squeezed_thermal(params: SqueezedThermalParams) -> np.ndarray:
    return np.diag(params.variances)


@dataclass(frozen=True)
class GaussianGenerator:
    """Drift ``K``, diffusion ``D`` and the loss rate ``gamma`` it is compared with.

    Complete positivity is deliberately not enforced here; use
    :func:`cp_min_eig` to test it.
    """

    K: np.ndarray
    D: np.ndarray
    gamma: float

    def __post_init__(self):
        K = np.asarray(self.K, dtype=float)
        D = np.asarray(self.D, dtype=float)
        if K.shape != D.shape:
            raise ValueError(f"K and D shapes differ: {K.shape} vs {D.shape}")
        n_modes_of(D)
        if np.linalg.norm(D - D.T) > TOL_HERM * max(1.0, np.linalg.norm(D)):
            raise ValueError("diffusion matrix must be symmetric")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "D", 0.5 * (D + D.T))

    @property
    def n_modes(self) -> int:
        return self.D.shape[0] // 2


def forward_generator(n_modes: int, gamma: float) -> GaussianGenerator:
    """Pure loss at a uniform rate: ``K = -gamma I``, ``D = 2 gamma I``."""
    eye = np.eye(2 * n_modes)
    return GaussianGenerator(K=-gamma * eye, D=2.0 * gamma * eye, gamma=gamma)


def pure_loss_path(Gamma0: np.ndarray, gamma: float, t: float) -> np.ndarray:
    """Covariance after time ``t`` of pure loss: ``e^{-2 gamma t} Gamma0 + (1 - e^{-2 gamma t}) I``."""
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    if gamma <= 0:
        raise ValueError(f"loss rate must be positive, got {gamma}")
    Gamma0 = np.asarray(Gamma0, dtype=float)
    eta = np.exp(-2.0 * gamma * t)
    return eta * Gamma0 + (-np.expm1(-2.0 * gamma * t)) * np.eye(Gamma0.shape[0])


def cp_matrix(gen: GaussianGenerator) -> np.ndarray:
    """``D + i (K sigma + sigma K^T)``; PSD iff the generator is completely positive."""
    sigma = symplectic_form(gen.n_modes)
    B = gen.K @ sigma
    return gen.D + 1j * (B - B.T)  # sigma K^T = -(K sigma)^T


def cp_min_eig(gen: GaussianGenerator) -> float:
    return min_eig_hermitian(cp_matrix(gen))


def is_cp(gen: GaussianGenerator, tol_psd: float = TOL_PSD) -> bool:
    return cp_min_eig(gen) >= -tol_psd


def cost_Z(D: np.ndarray, Gamma: np.ndarray) -> float:
    """Covariance-weighted diffusion rate ``Tr(Gamma^{-1} D)``.

    For a faithful Gaussian state this is the rate at which ``D`` injects
    displacement quantum Fisher information, and four times the
    displacement-Bures rate.
    """
    Gamma = np.asarray(Gamma, dtype=float)
    evals = np.linalg.eigvalsh(0.5 * (Gamma + Gamma.T))
    if evals[0] <= TOL_POSDEF:
        raise UnphysicalStateError(
            f"covariance is singular (smallest eigenvalue {evals[0]:.3e}); "
            "cost is undefined for non-faithful states"
        )
    return float(np.trace(np.linalg.solve(Gamma, np.asarray(D, dtype=float))))


def matching_residual(gen: GaussianGenerator, Gamma: np.ndarray) -> float:
    """Frobenius norm of ``K Gamma + Gamma K^T + D - 2 gamma (Gamma - I)``.

    Zero means the generator runs the pure-loss flow backwards at ``Gamma``.
    """
    Gamma = np.asarray(Gamma, dtype=float)
    KG = gen.K @ Gamma
    target = 2.0 * gen.gamma * (Gamma - np.eye(Gamma.shape[0]))
    return float(np.linalg.norm(KG + KG.T + gen.D - target))
