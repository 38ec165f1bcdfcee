"""Symplectic linear algebra on phase space.

Quadratures are ordered mode by mode, ``(q1, p1, q2, p2, ...)``, and the
vacuum covariance is the identity.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensionError, NotSymmetricError, UnphysicalStateError

TOL_SYMP = 1e-9
TOL_RECON = 1e-9
TOL_PSD = 1e-10
TOL_HERM = 1e-12
TOL_POSDEF = 1e-12

_SIGMA_1 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def symplectic_form(n_modes: int) -> np.ndarray:
    """Direct sum of ``n_modes`` copies of [[0, 1], [-1, 0]]."""
    if int(n_modes) != n_modes or n_modes < 1:
        raise InvalidDimensionError(f"n_modes must be a positive integer, got {n_modes!r}")
    return np.kron(np.eye(int(n_modes)), _SIGMA_1)


def n_modes_of(M: np.ndarray) -> int:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2 or M.shape[0] == 0:
        raise InvalidDimensionError(f"expected a nonempty 2N x 2N matrix, got shape {M.shape}")
    return M.shape[0] // 2


def _check_hermitian(M, tol, what="matrix"):
    scale = max(1.0, np.linalg.norm(M))
    err = np.linalg.norm(M - M.conj().T)
    if err > tol * scale:
        raise NotSymmetricError(f"{what} is not Hermitian: |M - M^H| = {err:.3e}")


def sqrt_spd(M: np.ndarray, tol_posdef: float = TOL_POSDEF) -> np.ndarray:
    """Principal square root of a real symmetric positive-definite matrix."""
    M = np.asarray(M, dtype=float)
    _check_hermitian(M, TOL_HERM, "input to sqrt_spd")
    evals, evecs = np.linalg.eigh(0.5 * (M + M.T))
    if evals[0] <= tol_posdef:
        raise UnphysicalStateError(
            f"matrix is not positive definite (smallest eigenvalue {evals[0]:.3e})"
        )
    R = (evecs * np.sqrt(evals)) @ evecs.T
    return 0.5 * (R + R.T)


def min_eig_hermitian(M: np.ndarray, tol_herm: float = TOL_HERM) -> float:
    """Smallest eigenvalue of a Hermitian matrix; raises if M is not Hermitian."""
    M = np.asarray(M)
    _check_hermitian(M, tol_herm)
    return float(np.linalg.eigvalsh(0.5 * (M + M.conj().T))[0])


@dataclass(frozen=True)
class WilliamsonDecomposition:
    """``Gamma = S @ diag(nu_1, nu_1, nu_2, nu_2, ...) @ S.T`` with S symplectic."""

    S: np.ndarray
    nu: np.ndarray

    @property
    def Lambda(self) -> np.ndarray:
        return np.diag(np.repeat(self.nu, 2))


def positive_branch(Gamma: np.ndarray, R: np.ndarray | None = None):
    """Positive eigenpairs of ``H = i R sigma R`` with ``R = Gamma^(1/2)``.

    Returns ``(nu, w, R)`` where ``w[:, k]`` is the unit eigenvector for
    ``nu[k]``, eigenvalues ascending as returned by ``eigh``.
    """
    n = n_modes_of(Gamma)
    if R is None:
        R = sqrt_spd(Gamma)
    A = R @ symplectic_form(n) @ R
    H = 1j * A
    evals, evecs = np.linalg.eigh(0.5 * (H + H.conj().T))
    # spectrum is symmetric, +-nu_k; the top half is the positive branch
    return evals[n:], evecs[:, n:], R


def darboux_basis(w: np.ndarray) -> np.ndarray:
    """Orthogonal matrix with columns ``x_1, y_1, x_2, y_2, ...`` from ``w_k = (x_k - i y_k)/sqrt(2)``."""
    dim, n = w.shape
    O = np.empty((dim, 2 * n))
    O[:, 0::2] = np.sqrt(2.0) * w.real
    O[:, 1::2] = -np.sqrt(2.0) * w.imag
    if np.linalg.norm(O.T @ O - np.eye(2 * n)) > 1e-10:
        # bilinear orthogonality w_j^T w_k = 0 degraded by rounding; nearest orthogonal matrix
        U, _, Vt = np.linalg.svd(O)
        O = U @ Vt
    return O


def frame_from_basis(R: np.ndarray, O: np.ndarray, nu: np.ndarray) -> np.ndarray:
    """``S = R O Lambda^(-1/2)``."""
    return R @ O / np.sqrt(np.repeat(nu, 2))[None, :]


def _dominant_mode(w: np.ndarray) -> np.ndarray:
    weight = np.abs(w) ** 2
    per_mode = weight[0::2] + weight[1::2]
    return np.argmax(per_mode, axis=0)


def canonical_order(nu: np.ndarray, w: np.ndarray, tol: float):
    """Sort eigenpairs by descending ``nu``; near-ties (within ``tol``) by dominant mode."""
    order = np.argsort(-nu, kind="stable")
    nu, w = nu[order].copy(), w[:, order].copy()
    mode = _dominant_mode(w)
    start = 0
    for k in range(1, len(nu) + 1):
        if k == len(nu) or nu[start] - nu[k] > tol:
            block = np.arange(start, k)
            block = block[np.argsort(mode[block], kind="stable")]
            nu[start:k], w[:, start:k] = nu[block], w[:, block]
            mode[start:k] = mode[block]
            start = k
    return nu, w


def symplectic_inverse(S: np.ndarray) -> np.ndarray:
    """``S^{-1} = -sigma S^T sigma`` for symplectic ``S``."""
    sigma = symplectic_form(n_modes_of(S))
    return -sigma @ S.T @ sigma


def williamson(Gamma: np.ndarray, tol_cluster: float = 1e-6) -> WilliamsonDecomposition:
    """Williamson normal form via the Hermitian matrix ``i Gamma^(1/2) sigma Gamma^(1/2)``.

    Symplectic eigenvalues are returned in descending order. Eigenvalues that
    agree to within ``tol_cluster * max(nu)`` are ordered by the mode on which
    their eigenvector is concentrated.
    """
    Gamma = np.asarray(Gamma, dtype=float)
    n_modes_of(Gamma)
    _check_hermitian(Gamma, TOL_HERM, "covariance matrix")
    nu, w, R = positive_branch(Gamma)
    if np.any(np.abs(nu) < TOL_POSDEF):
        raise UnphysicalStateError("degenerate symplectic spectrum (nu_k ~ 0)")

    nu, w = canonical_order(nu, w, tol_cluster * np.max(nu))
    O = darboux_basis(w)
    return WilliamsonDecomposition(S=frame_from_basis(R, O, nu), nu=nu)


def is_physical_state(Gamma: np.ndarray, tol_psd: float = TOL_PSD) -> tuple[bool, float]:
    """Uncertainty relation ``Gamma + i sigma >= 0``; returns ``(ok, min eigenvalue)``."""
    Gamma = np.asarray(Gamma, dtype=float)
    n = n_modes_of(Gamma)
    margin = min_eig_hermitian(Gamma + 1j * symplectic_form(n), tol_herm=1e-9)
    return margin >= -tol_psd, margin


def is_symplectic(S: np.ndarray, tol: float = TOL_SYMP) -> bool:
    sigma = symplectic_form(n_modes_of(S))
    return np.linalg.norm(S @ sigma @ S.T - sigma) <= tol * max(1.0, np.linalg.norm(S) ** 2)


def symplectic_from_hamiltonian(h: np.ndarray) -> np.ndarray:
    """``expm(sigma @ h)`` for symmetric ``h``; always symplectic."""
    from scipy.linalg import expm

    h = 0.5 * (h + h.T)
    return expm(symplectic_form(n_modes_of(h)) @ h)


def passive_symplectic(U: np.ndarray) -> np.ndarray:
    """Orthogonal symplectic matrix of the unitary ``U`` in mode-interleaved ordering."""
    n = U.shape[0]
    T = np.zeros((2 * n, 2 * n))
    T[0::2, 0::2] = U.real
    T[0::2, 1::2] = U.imag
    T[1::2, 0::2] = -U.imag
    T[1::2, 1::2] = U.real
    return T
