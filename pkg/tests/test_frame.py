import warnings

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import unitary_group

from qrev.asymptotics import endpoint_cost, pure_endpoint_action
from qrev.errors import DivergenceError
from qrev.frame import (
    additive_bound,
    build_moving_frame,
    canonical_x_star,
    cluster_hermitian,
    frame_jumps,
    integrated_action,
    kinematic_residual,
    multimode_optimum,
    scalar_sources,
    total_costs,
)
from qrev.gaussian import SqueezedThermalParams, pure_loss_path, squeezed_thermal
from qrev.one_mode import branch_cost, z_min_exact
from qrev.symplectic import passive_symplectic
from qrev.verify import crossing_fixture, crossing_time, kinematic_ratio, random_mixed_state

from conftest import product_state


def one_mode_params(Gamma):
    vq, vp = np.linalg.eigvalsh(Gamma)[::-1]
    return SqueezedThermalParams(float(np.sqrt(vq * vp)), float(0.25 * np.log(vq / vp)))


def test_one_mode_x_matches_closed_form():
    G0 = squeezed_thermal(SqueezedThermalParams(2.5, 0.7))
    f = build_moving_frame(G0, 1.0, np.linspace(0.0, 2.0, 41))
    for i in range(len(f.times)):
        p = one_mode_params(f.Gamma(i))
        assert canonical_x_star(f, i)[0] == pytest.approx(p.x, rel=1e-9)
        assert multimode_optimum(f, i).total == pytest.approx(z_min_exact(p, 1.0).z_min, rel=1e-9, abs=1e-12)


def test_thermal_product_identity_frame():
    f = build_moving_frame(product_state((3.0, 0.0), (5.0, 0.0)), 1.0, np.linspace(0.0, 2.0, 41))
    for i in range(len(f.times)):
        assert np.allclose(canonical_x_star(f, i), 1.0 / f.nu[i], rtol=1e-12)
        S = f.S[i]
        # label 0 always carries the nu=5 mode (second block), label 1 the nu=3 mode
        assert np.allclose(S[:2, :2], 0.0, atol=1e-12) and np.allclose(S[2:, 2:], 0.0, atol=1e-12)
        assert f.nu[i, 0] > f.nu[i, 1]


def test_uncorrelated_product_x():
    pairs = ((2.0, 0.4), (3.5, 1.1))
    f = build_moving_frame(product_state(*pairs), 1.0, np.linspace(0.1, 1.5, 15))
    for i in range(len(f.times)):
        G = f.Gamma(i)
        expect = sorted(((one_mode_params(G[2 * k:2 * k + 2, 2 * k:2 * k + 2])) for k in range(2)),
                        key=lambda p: -p.nu)
        assert np.allclose(canonical_x_star(f, i), [p.x for p in expect], rtol=1e-9)
        total = sum(z_min_exact(p, 1.0).z_min for p in expect)
        assert multimode_optimum(f, i).total == pytest.approx(total, rel=1e-9)


def test_isotropic_thermal_degenerate():
    f = build_moving_frame(2.5 * np.eye(6), 1.0, [0.0, 0.1, 0.2])
    for i in range(3):
        assert f.clusters[i] == ((0, 1, 2),)
        assert np.allclose(canonical_x_star(f, i), 1.0 / f.nu[i, 0], rtol=1e-12)


def _degenerate_cluster(nu=2.0, r=(0.2, 0.9), seed=7):
    U = unitary_group.rvs(2, random_state=seed)
    T = passive_symplectic(U)
    return T @ product_state((nu, r[0]), (nu, r[1])) @ T.T


def test_degenerate_cluster_spectrum_and_majorization():
    nu = 2.0
    f = build_moving_frame(_degenerate_cluster(nu), 1.0, [0.0, 0.01])
    assert f.clusters[0] == ((0, 1),)
    expect = np.sort(np.cosh([0.4, 1.8]) / nu)
    assert np.allclose(np.sort(canonical_x_star(f, 0)), expect, rtol=1e-9)
    C = cluster_hermitian(f.G[0], [0, 1]) / nu
    rng = np.random.default_rng(3)
    best = np.sum(branch_cost(np.linalg.eigvalsh(C), nu))
    for _ in range(50):
        V = unitary_group.rvs(2, random_state=rng)
        diag = np.real(np.diag(V.conj().T @ C @ V))
        assert best >= np.sum(branch_cost(diag, nu)) - 1e-12


def test_gauge_invariance_of_total_cost():
    G0 = _degenerate_cluster()
    times = np.linspace(0.0, 1.0, 21)
    base = total_costs(build_moving_frame(G0, 1.0, times))
    for seed in range(4):
        T = passive_symplectic(unitary_group.rvs(2, random_state=100 + seed))
        other = total_costs(build_moving_frame(T @ G0 @ T.T, 1.0, times))
        assert np.allclose(other, base, rtol=1e-9)


def test_scalar_sources_examples():
    f = build_moving_frame(np.diag([3.0, 3.0]), 1.0, [0.0, 1e-3])
    assert scalar_sources(f, 0)[0] == pytest.approx(4.0, rel=1e-12)
    f = build_moving_frame(squeezed_thermal(SqueezedThermalParams(np.cosh(1.0), 0.5)), 1.0, [0.0, 1e-3])
    assert scalar_sources(f, 0)[0] == pytest.approx(0.0, abs=1e-12)
    f = build_moving_frame(squeezed_thermal(SqueezedThermalParams(1.01, 0.5)), 1.0, [0.0, 1e-3])
    assert scalar_sources(f, 0)[0] < 0


def test_sources_are_minus_nu_dot():
    rng = np.random.default_rng(11)
    G0 = random_mixed_state(rng, 3)
    h = 1e-5
    f = build_moving_frame(G0, 1.0, [0.5 - h, 0.5, 0.5 + h])
    s = scalar_sources(f, 1)
    assert np.allclose(s, -(f.nu[2] - f.nu[0]) / (2 * h), rtol=1e-5, atol=1e-8)


def test_crossing_continuity_and_jumps():
    G0 = crossing_fixture()
    tc = crossing_time(G0)
    times = np.sort(np.concatenate([np.linspace(0.05, 2.0, 400), [tc - 1e-7, tc + 1e-7]]))
    f = build_moving_frame(G0, 1.0, times)
    assert frame_jumps(f).max() <= 10.0
    i = int(np.searchsorted(times, tc))
    z = total_costs(f)
    assert abs(z[i] - z[i - 1]) <= 1e-6
    # the labels swap through the crossing only by continuity, never by sorting
    assert (f.nu[0, 0] - f.nu[0, 1]) * (f.nu[-1, 0] - f.nu[-1, 1]) < 0


def test_kinematic_residual_vanishes_on_product():
    f = build_moving_frame(crossing_fixture(), 1.0, np.linspace(0.1, 1.1, 21))
    assert max(kinematic_residual(f, i) for i in range(21)) == 0.0


@pytest.mark.parametrize("seed,n", [(1, 2), (2, 3), (3, 2)])
def test_kinematic_residual_first_order(seed, n):
    ratio, (coarse, fine) = kinematic_ratio(random_mixed_state(np.random.default_rng(seed), n))
    assert 2 / 1.5 <= ratio <= 2 * 1.5
    assert fine < coarse


def test_attainment_random_states():
    rng = np.random.default_rng(5)
    for n in (1, 2, 3, 4):
        f = build_moving_frame(random_mixed_state(rng, n), 1.0, np.linspace(0.05, 2.0, 20))
        for i in range(len(f.times)):
            opt = multimode_optimum(f, i)
            bound = additive_bound(opt.x_star, f.nu[i], 1.0)
            assert opt.total == pytest.approx(bound, rel=1e-9)
            assert opt.cp_margin >= -1e-8
            assert opt.matching_residual <= 1e-7
            assert np.allclose(opt.generator.D, opt.generator.D.T)


def test_pure_mode_diverges():
    G0 = product_state((1.0, 0.7), (3.0, 0.0))
    f = build_moving_frame(G0, 1.0, [0.0, 0.1])
    with pytest.raises(DivergenceError):
        multimode_optimum(f, 0)


def test_interior_near_pure_warns():
    with pytest.warns(RuntimeWarning):
        build_moving_frame(np.eye(2), 1.0, [0.0, 0.1])


def test_frame_input_validation():
    with pytest.raises(ValueError):
        build_moving_frame(np.eye(2), 1.0, [0.1])
    with pytest.raises(ValueError):
        build_moving_frame(np.eye(2), 1.0, [0.2, 0.1])


def test_action_thermal_matches_quadrature():
    f = build_moving_frame(np.diag([3.0, 3.0]), 1.0, np.linspace(0.0, 1.2, 2401))

    def z(t):
        nu = 1.0 + 2.0 * np.exp(-2 * t)
        return branch_cost(1.0 / nu, nu)
    ref, _ = quad(z, 0.1, 1.0, epsabs=1e-13)
    assert integrated_action(f, 0.1, 1.0) == pytest.approx(ref, rel=1e-6)


def test_action_outside_grid_rejected():
    f = build_moving_frame(np.diag([3.0, 3.0]), 1.0, np.linspace(0.1, 1.0, 11))
    with pytest.raises(ValueError):
        integrated_action(f, 0.05, 0.5)


def test_action_zero_at_noiseless_instant():
    r = 0.5
    f = build_moving_frame(squeezed_thermal(SqueezedThermalParams(np.cosh(2 * r), r)), 1.0,
                           np.linspace(0.0, 1e-6, 11))
    assert abs(integrated_action(f, 1e-7, 1e-6)) <= 1e-12


@pytest.fixture(scope="module")
def pure_frame():
    G0 = squeezed_thermal(SqueezedThermalParams(1.0, 1.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        return build_moving_frame(G0, 1.0, np.logspace(-6, 0, 1201))


def test_pure_endpoint_action_slope(pure_frame):
    eps = np.logspace(-5, -3, 9)
    A = [integrated_action(pure_frame, e, 1.0) for e in eps]
    slope = np.polyfit(np.log(1 / eps), A, 1)[0]
    assert slope == pytest.approx(2.0, abs=0.05)
    assert A[0] == pytest.approx(pure_endpoint_action(1.0, 1.0, 1e-5, 1.0), rel=1e-4)


def test_pure_endpoint_consistent_with_asymptotics(pure_frame):
    for i in range(0, len(pure_frame.times), 100):
        t = pure_frame.times[i]
        assert multimode_optimum(pure_frame, i).total == pytest.approx(endpoint_cost(1.0, 1.0, t), rel=1e-8)
