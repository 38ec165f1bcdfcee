"""Moving Williamson frame along the pure-loss path and the multimode reverse law.

The frame is tracked instant by instant: eigenvectors of ``i R sigma R`` are
matched to the previous instant by maximal overlap, phase-aligned, and inside
near-degenerate clusters rotated to diagonalize the cluster metric (the
canonical gauge). Time derivatives are central finite differences.
"""
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DivergenceError, UnphysicalStateError
from .gaussian import GaussianGenerator, cp_min_eig, matching_residual, pure_loss_path
from .one_mode import branch_cost, scalar_block_optimum
from .symplectic import (
    canonical_order,
    darboux_basis,
    frame_from_basis,
    n_modes_of,
    positive_branch,
    symplectic_form,
    symplectic_inverse,
)

TOL_CLUSTER = 1e-6
TOL_DEGENERATE = 1e-9  # C eigenvalues closer than this are treated as one gauge orbit
MAX_DEVIATION = 0.2

_S1 = symplectic_form(1)


# ---------------------------------------------------------------- blocks

def commuting_part(B: np.ndarray) -> np.ndarray:
    """Part of a 2x2 block that commutes with [[0,1],[-1,0]]."""
    return 0.5 * (B + _S1 @ B @ _S1.T)


def anticommuting_part(B: np.ndarray) -> np.ndarray:
    return 0.5 * (B - _S1 @ B @ _S1.T)


def block(M: np.ndarray, j: int, k: int) -> np.ndarray:
    return M[2 * j:2 * j + 2, 2 * k:2 * k + 2]


def clusters_of(nu: np.ndarray, tol: float) -> list[np.ndarray]:
    """Index sets of eigenvalues chained together by gaps <= ``tol``."""
    order = np.argsort(nu, kind="stable")
    groups, current = [], [order[0]]
    for prev, idx in zip(order[:-1], order[1:]):
        if nu[idx] - nu[prev] <= tol:
            current.append(idx)
        else:
            groups.append(np.sort(np.array(current)))
            current = [idx]
    groups.append(np.sort(np.array(current)))
    return sorted(groups, key=lambda g: g[0])


def cluster_hermitian(G: np.ndarray, idx) -> np.ndarray:
    """Complex Hermitian matrix of the commuting part of ``G`` on the cluster ``idx``.

    A commuting 2x2 block ``[[a, b], [-b, a]]`` maps to ``a + i b``.
    """
    m = len(idx)
    H = np.empty((m, m), dtype=complex)
    for p, j in enumerate(idx):
        for q, k in enumerate(idx):
            Bc = commuting_part(block(G, j, k))
            H[p, q] = Bc[0, 0] + 1j * Bc[0, 1]
    return 0.5 * (H + H.conj().T)


# ---------------------------------------------------------------- tracking

def _instant(Gamma):
    nu, w, R = positive_branch(Gamma)
    if np.any(nu <= 0):
        raise UnphysicalStateError("covariance has a non-positive symplectic eigenvalue")
    return nu, w, R, np.linalg.inv(Gamma)


def _cluster_metric(w, Ginv):
    # w_j^H Gamma^{-1} w_k; its diagonal is x_k(S)
    C = w.conj().T @ Ginv @ w
    return 0.5 * (C + C.conj().T)


def _canonicalize(w, nu, Ginv, tol_cluster, w_ref=None):
    """Rotate each cluster onto eigenvectors of its metric; match to ``w_ref`` if given."""
    clusters = clusters_of(nu, tol_cluster * np.max(nu))
    for idx in clusters:
        if len(idx) == 1:
            continue
        wc = w[:, idx]
        evals, V = np.linalg.eigh(_cluster_metric(wc, Ginv))
        wc = wc @ V
        if w_ref is not None:
            P = w_ref[:, idx].conj().T @ wc
            _, col = linear_sum_assignment(-np.abs(P))
            wc, evals = wc[:, col], evals[col]
            scale = max(1.0, np.max(np.abs(evals)))
            for sub in clusters_of(evals, TOL_DEGENERATE * scale):
                if len(sub) > 1:
                    # gauge orbit: nearest unitary to the reference basis
                    U, _, Vh = np.linalg.svd(wc[:, sub].conj().T @ w_ref[:, idx[sub]])
                    wc[:, sub] = wc[:, sub] @ (U @ Vh)
        w[:, idx] = wc
    return w, clusters


def _initial_basis(Gamma, tol_cluster):
    nu, w, R, Ginv = _instant(Gamma)
    nu, w = canonical_order(nu, w, tol_cluster * np.max(nu))
    w, clusters = _canonicalize(w, nu, Ginv, tol_cluster)
    # phase convention: largest component real and positive
    lead = w[np.argmax(np.abs(w), axis=0), np.arange(w.shape[1])]
    w = w * (lead.conj() / np.abs(lead))[None, :]
    return nu, w, R, Ginv, clusters


def _aligned_basis(Gamma, w_prev, tol_cluster):
    """Eigenbasis at ``Gamma`` continued from ``w_prev``; returns deviation from a permutation."""
    nu, w, R, Ginv = _instant(Gamma)
    P = w_prev.conj().T @ w
    _, col = linear_sum_assignment(-np.abs(P))
    nu, w = nu[col], w[:, col]
    w, clusters = _canonicalize(w, nu, Ginv, tol_cluster, w_ref=w_prev)
    d = np.sum(w_prev.conj() * w, axis=0)
    mag = np.abs(d)
    w = w * np.where(mag > 0, d.conj() / np.where(mag > 0, mag, 1.0), 1.0)[None, :]
    return nu, w, R, Ginv, clusters, float(1.0 - mag.min())


def _advance(Gamma0, gamma, t0, t1, w_prev, tol_cluster, max_step, max_deviation, depth=0):
    n_sub = max(1, int(np.ceil((t1 - t0) / max_step - 1e-12)))
    ts = np.linspace(t0, t1, n_sub + 1)[1:]
    t_prev = t0
    for t in ts:
        out = _aligned_basis(pure_loss_path(Gamma0, gamma, t), w_prev, tol_cluster)
        if out[-1] > max_deviation:
            if depth >= 40:
                raise ArithmeticError(f"frame tracking failed to converge near t={t:.6g}")
            out = _advance(Gamma0, gamma, t_prev, t, w_prev, tol_cluster,
                           0.5 * (t - t_prev), max_deviation, depth + 1)
        w_prev = out[1]
        t_prev = t
    return out


# ---------------------------------------------------------------- frame

@dataclass(frozen=True)
class MovingFrame:
    """Continuity-tracked Williamson frame ``Gamma_t = S_c(t) Lambda_t S_c(t)^T``.

    Arrays are indexed by instant first. ``W`` is ``S_c^{-1} dS_c/dt`` from
    central differences (one-sided at the ends); ``G = (S_c^T S_c)^{-1}``.
    """

    times: np.ndarray
    S: np.ndarray
    nu: np.ndarray
    W: np.ndarray
    G: np.ndarray
    x_star: np.ndarray
    clusters: tuple
    gamma: float
    Gamma0: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.nu.shape[1]

    def Gamma(self, i: int) -> np.ndarray:
        return pure_loss_path(self.Gamma0, self.gamma, self.times[i])


def build_moving_frame(Gamma0: np.ndarray, gamma: float, times, tol_cluster: float = TOL_CLUSTER,
                       max_step: float | None = None,
                       max_deviation: float = MAX_DEVIATION) -> MovingFrame:
    """Track the Williamson frame of the pure-loss path over ``times``.

    Between grid instants the eigenbasis is carried in substeps of at most
    ``max_step`` (default ``0.01/gamma``); a substep is halved whenever the
    aligned overlap matrix is further than ``max_deviation`` from a permutation.
    """
    Gamma0 = np.asarray(Gamma0, dtype=float)
    n = n_modes_of(Gamma0)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 2:
        raise ValueError("need at least two instants")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    if times[0] < 0:
        raise ValueError("times must be non-negative")
    if max_step is None:
        max_step = 0.01 / gamma

    Nt = len(times)
    S = np.empty((Nt, 2 * n, 2 * n))
    G = np.empty_like(S)
    nus = np.empty((Nt, n))
    xs = np.empty((Nt, n))
    clusters = []
    w_prev = None
    for i, t in enumerate(times):
        Gamma = pure_loss_path(Gamma0, gamma, t)
        try:
            if w_prev is None:
                nu, w, R, Ginv, cl = _initial_basis(Gamma, tol_cluster)
            else:
                nu, w, R, Ginv, cl, _ = _advance(Gamma0, gamma, times[i - 1], t, w_prev,
                                                 tol_cluster, max_step, max_deviation)
        except np.linalg.LinAlgError as exc:
            raise ArithmeticError(f"eigensolver failed at instant {i} (t={t:.6g})") from exc
        if t > times[0] and np.any(nu < 1.0 + tol_cluster):
            warnings.warn(f"near-pure symplectic eigenvalue at interior instant {i} (t={t:.6g})",
                          RuntimeWarning, stacklevel=2)
        w_prev = w
        S[i] = frame_from_basis(R, darboux_basis(w), nu)
        Si = symplectic_inverse(S[i])
        G[i] = Si @ Si.T
        nus[i] = nu
        xs[i] = _x_star(G[i], nu, cl)
        clusters.append(tuple(tuple(int(k) for k in c) for c in cl))

    dS = np.gradient(S, times, axis=0, edge_order=1)
    W = np.einsum("tij,tjk->tik", np.array([symplectic_inverse(s) for s in S]), dS)
    return MovingFrame(times=times, S=S, nu=nus, W=W, G=G, x_star=xs, clusters=tuple(clusters),
                       gamma=float(gamma), Gamma0=Gamma0)


def frame_x(G: np.ndarray, nu: np.ndarray) -> np.ndarray:
    """Per-block anti-squeezing data ``Tr(G_kk) / (2 nu_k)`` of a given frame."""
    return np.array([np.trace(block(G, k, k)) / (2.0 * nu[k]) for k in range(len(nu))])


def _x_star(G, nu, clusters):
    x = frame_x(G, nu)
    for idx in clusters:
        if len(idx) > 1:
            nbar = np.mean(nu[idx])
            x[idx] = np.linalg.eigvalsh(cluster_hermitian(G, idx) / nbar)
    return x


def canonical_x_star(frame: MovingFrame, t_index: int) -> np.ndarray:
    """Gauge-invariant anti-squeezing data at one instant.

    Isolated blocks use the block trace of the metric; near-degenerate clusters
    use eigenvalues of their normalized Hermitian metric, which in the
    canonical gauge coincide with the block traces.
    """
    G, nu = frame.G[t_index], frame.nu[t_index]
    clusters = [np.array(c) for c in frame.clusters[t_index]]
    x = _x_star(G, nu, clusters)
    # report the eigenvalues in the frame's own labeling
    for idx in clusters:
        if len(idx) > 1:
            diag = frame_x(G, nu)[idx]
            x[idx] = x[idx][np.argsort(np.argsort(diag))]
    return x


def scalar_sources(frame: MovingFrame, t_index: int) -> np.ndarray:
    """Reverse sources ``s_k = 2 gamma nu_k (1 - x_k*)``, equal to ``-d nu_k/dt``."""
    nu = frame.nu[t_index]
    return 2.0 * frame.gamma * nu * (1.0 - canonical_x_star(frame, t_index))


def kinematic_residual(frame: MovingFrame, t_index: int) -> float:
    """Largest ``|(nu_k - nu_j) W^C_jk - 2 gamma G^C_jk|`` over off-diagonal blocks."""
    W, G, nu = frame.W[t_index], frame.G[t_index], frame.nu[t_index]
    n = len(nu)
    worst = 0.0
    for j in range(n):
        for k in range(n):
            if j == k:
                continue
            R = (nu[k] - nu[j]) * commuting_part(block(W, j, k)) - 2 * frame.gamma * commuting_part(block(G, j, k))
            worst = max(worst, float(np.linalg.norm(R)))
    return worst


def frame_jumps(frame: MovingFrame) -> np.ndarray:
    """``||S_c(t_{i+1}) - S_c(t_i)||_F / (t_{i+1} - t_i)`` for each step."""
    dS = np.linalg.norm(np.diff(frame.S, axis=0), axis=(1, 2))
    return dS / np.diff(frame.times)


# ---------------------------------------------------------------- optimum

def kinematic_velocity(G: np.ndarray, nu: np.ndarray, gamma: float, clusters) -> np.ndarray:
    """Forward frame velocity reconstructed from the kinematic identities.

    Off-diagonal blocks: ``W^C_jk = 2 gamma G^C_jk / (nu_k - nu_j)`` between
    clusters and ``W^A_jk = 2 gamma G^A_jk / (nu_j + nu_k)``. The commuting
    parts inside a cluster and inside each diagonal block are gauge rotations;
    they are set to zero because they drop out of both matching and CP.
    """
    n = len(nu)
    label = np.empty(n, dtype=int)
    for c, idx in enumerate(clusters):
        label[list(idx)] = c
    W = np.zeros((2 * n, 2 * n))
    for j in range(n):
        for k in range(n):
            Gjk = block(G, j, k)
            Wjk = 2 * gamma * anticommuting_part(Gjk) / (nu[j] + nu[k])
            if label[j] != label[k]:
                Wjk = Wjk + 2 * gamma * commuting_part(Gjk) / (nu[k] - nu[j])
            W[2 * j:2 * j + 2, 2 * k:2 * k + 2] = Wjk
    return W


@dataclass(frozen=True)
class MultimodeOptimum:
    mode_costs: np.ndarray
    total: float
    generator: GaussianGenerator
    cp_margin: float
    matching_residual: float
    x_star: np.ndarray
    sources: np.ndarray


def additive_bound(x_star, nu, gamma: float) -> float:
    """Sum of one-mode costs ``4 gamma |x_k - 1| / (nu_k - sgn(x_k - 1))``."""
    return float(np.sum(branch_cost(np.asarray(x_star), np.asarray(nu), gamma)))


def multimode_optimum(frame: MovingFrame, t_index: int) -> MultimodeOptimum:
    """Blockwise optimal reverse generator at one instant, pushed back to the lab frame.

    In the moving frame each block gets ``D = c_k I`` and ``K = a_k I`` with
    ``c_k`` the scalar block optimum and ``2 a_k nu_k + c_k = s_k``. The lab
    generator is ``K* = S (K_mov - W) S^{-1}``, ``D* = S D_mov S^T``, where
    ``-W`` is the reverse-time frame velocity.
    """
    gamma = frame.gamma
    nu, G, S = frame.nu[t_index], frame.G[t_index], frame.S[t_index]
    x = canonical_x_star(frame, t_index)
    s = 2.0 * gamma * nu * (1.0 - frame_x(G, nu))
    n = len(nu)
    c = np.empty(n)
    z = np.empty(n)
    for k in range(n):
        try:
            c[k], z[k] = scalar_block_optimum(s[k], nu[k])
        except DivergenceError as exc:
            raise DivergenceError(f"pure-endpoint divergence in block {k} at t={frame.times[t_index]:.6g}") from exc
    a = (s - c) / (2.0 * nu)
    K_mov = np.diag(np.repeat(a, 2))
    D_mov = np.diag(np.repeat(c, 2))
    W = kinematic_velocity(G, nu, gamma, frame.clusters[t_index])
    K = S @ (K_mov - W) @ symplectic_inverse(S)
    D = S @ D_mov @ S.T
    gen = GaussianGenerator(K=K, D=0.5 * (D + D.T), gamma=gamma)
    Gamma = frame.Gamma(t_index)
    return MultimodeOptimum(
        mode_costs=z,
        total=float(np.sum(z)),
        generator=gen,
        cp_margin=cp_min_eig(gen),
        matching_residual=matching_residual(gen, Gamma),
        x_star=x,
        sources=s,
    )


def total_costs(frame: MovingFrame) -> np.ndarray:
    """Additive minimal cost at every instant of the frame."""
    return np.array([additive_bound(canonical_x_star(frame, i), frame.nu[i], frame.gamma)
                     for i in range(len(frame.times))])


def integrated_action(frame: MovingFrame, t_lo: float, t_hi: float) -> float:
    """Trapezoidal integral of the minimal total cost over ``[t_lo, t_hi]``."""
    times = frame.times
    if not (0 < t_lo < t_hi):
        raise ValueError("need 0 < t_lo < t_hi")
    if t_lo < times[0] or t_hi > times[-1]:
        raise ValueError(f"[{t_lo}, {t_hi}] is outside the frame grid [{times[0]}, {times[-1]}]")
    z = total_costs(frame)
    inside = (times > t_lo) & (times < t_hi)
    t = np.concatenate([[t_lo], times[inside], [t_hi]])
    zz = np.concatenate([[np.interp(t_lo, times, z)], z[inside], [np.interp(t_hi, times, z)]])
    return float(np.trapezoid(zz, t) if hasattr(np, "trapezoid") else np.trapz(zz, t))
