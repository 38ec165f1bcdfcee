import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qrev.errors import InvalidDimensionError, NotSymmetricError, UnphysicalStateError
from qrev.symplectic import (
    TOL_RECON,
    is_physical_state,
    is_symplectic,
    min_eig_hermitian,
    passive_symplectic,
    positive_branch,
    sqrt_spd,
    symplectic_form,
    symplectic_from_hamiltonian,
    symplectic_inverse,
    williamson,
)

from conftest import random_physical


def test_form_one_mode():
    assert np.array_equal(symplectic_form(1), [[0, 1], [-1, 0]])


def test_form_two_modes_is_block_diagonal():
    s = symplectic_form(2)
    assert np.array_equal(s[:2, :2], symplectic_form(1))
    assert np.array_equal(s[2:, 2:], symplectic_form(1))
    assert not s[:2, 2:].any() and not s[2:, :2].any()


@pytest.mark.parametrize("n", [1, 2, 3, 7])
def test_form_identities_exact(n):
    s = symplectic_form(n)
    assert np.array_equal(s.T, -s)
    assert np.array_equal(s @ s, -np.eye(2 * n))


@pytest.mark.parametrize("n", [0, -1, 1.5])
def test_form_rejects_bad_dimension(n):
    with pytest.raises(InvalidDimensionError):
        symplectic_form(n)


def test_sqrt_spd_examples():
    assert np.allclose(sqrt_spd(np.eye(2)), np.eye(2))
    assert np.allclose(sqrt_spd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    R = sqrt_spd(np.diag([np.exp(2.0), np.exp(-2.0)]))
    assert np.allclose(R, np.diag([np.e, 1 / np.e]), rtol=1e-14)


def test_sqrt_spd_rejects_nonsymmetric_and_singular():
    with pytest.raises(NotSymmetricError):
        sqrt_spd(np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(UnphysicalStateError):
        sqrt_spd(np.diag([1.0, 0.0]))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(1, 8), log_cond=st.floats(0, 6))
def test_sqrt_spd_reconstructs(seed, dim, log_cond):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    M = (Q * np.logspace(0, log_cond, dim)) @ Q.T
    M = 0.5 * (M + M.T)
    R = sqrt_spd(M)
    assert np.array_equal(R, R.T)
    assert np.linalg.norm(R @ R - M) <= TOL_RECON * np.linalg.norm(M)


def test_min_eig_examples():
    assert min_eig_hermitian(np.eye(2)) == pytest.approx(1.0)
    assert min_eig_hermitian(np.array([[1, 1j], [-1j, 1]])) == pytest.approx(0.0, abs=1e-15)


def test_min_eig_rejects_non_hermitian():
    with pytest.raises(NotSymmetricError):
        min_eig_hermitian(np.array([[1, 1j], [1j, 1]]))


def test_williamson_vacuum():
    w = williamson(np.eye(2))
    assert np.allclose(w.nu, [1.0])
    assert is_symplectic(w.S)
    assert np.allclose(w.S @ w.S.T, np.eye(2))


def test_williamson_squeezed_thermal():
    nu, r = 3.0, 0.5
    w = williamson(np.diag([nu * np.exp(2 * r), nu * np.exp(-2 * r)]))
    assert w.nu[0] == pytest.approx(3.0, rel=1e-13)


def test_williamson_sorted_descending():
    w = williamson(np.diag([2.0, 2.0, 5.0, 5.0]))
    assert np.allclose(w.nu, [5.0, 2.0])
    assert np.allclose(w.S @ w.Lambda @ w.S.T, np.diag([2.0, 2.0, 5.0, 5.0]))


def test_williamson_tie_broken_by_mode_index():
    G = np.diag([3.0, 3.0, 3.0, 3.0, 1.5, 1.5])
    w = williamson(G)
    assert np.allclose(w.nu, [3.0, 3.0, 1.5])
    S = w.S
    # first frame column lives on mode 0, second on mode 1
    assert np.linalg.norm(S[:2, :2]) > 0.99 and np.linalg.norm(S[2:4, 2:4]) > 0.99


def test_williamson_rejects_non_positive():
    with pytest.raises(UnphysicalStateError):
        williamson(np.diag([1.0, -1.0]))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_williamson_invariants_random(rng, n):
    for _ in range(10):
        G, nus, _ = random_physical(rng, n)
        w = williamson(G)
        sigma = symplectic_form(n)
        scale = max(1.0, np.linalg.norm(w.S) ** 2)
        assert np.linalg.norm(w.S @ sigma @ w.S.T - sigma) <= 1e-9 * scale
        assert np.linalg.norm(w.S @ w.Lambda @ w.S.T - G) <= 1e-9 * np.linalg.norm(G)
        assert np.prod(w.nu) == pytest.approx(np.sqrt(np.linalg.det(G)), rel=1e-10)
        assert np.allclose(w.nu, np.sort(nus)[::-1], rtol=1e-9)


def test_spectrum_invariant_under_symplectic_congruence(rng):
    for n in (1, 2, 3):
        G, _, _ = random_physical(rng, n)
        T = symplectic_from_hamiltonian(0.7 * rng.normal(size=(2 * n, 2 * n)))
        assert np.allclose(williamson(T @ G @ T.T).nu, williamson(G).nu, rtol=1e-8)


def test_darboux_pair_convention(rng):
    G, _, _ = random_physical(rng, 3)
    nu, w, R = positive_branch(G)
    A = R @ symplectic_form(3) @ R
    x, y = np.sqrt(2) * w.real, -np.sqrt(2) * w.imag
    for k in range(3):
        assert np.allclose(A @ x[:, k], -nu[k] * y[:, k], atol=1e-10)


def test_is_physical_examples():
    ok, m = is_physical_state(np.eye(2))
    assert ok and m == pytest.approx(0.0, abs=1e-14)
    ok, _ = is_physical_state(np.diag([0.5, 0.5]))
    assert not ok
    for r in (0.1, 1.0, 2.5):
        ok, m = is_physical_state(np.diag([np.exp(2 * r), np.exp(-2 * r)]))
        assert ok and m == pytest.approx(0.0, abs=1e-10)


def test_passive_and_inverse(rng):
    Z = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    U, _ = np.linalg.qr(Z)
    T = passive_symplectic(U)
    assert is_symplectic(T)
    assert np.allclose(T @ T.T, np.eye(6))
    S = symplectic_from_hamiltonian(rng.normal(size=(6, 6)))
    assert np.allclose(symplectic_inverse(S) @ S, np.eye(6), atol=1e-9)
