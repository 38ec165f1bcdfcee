import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qrev.errors import UnphysicalStateError
from qrev.gaussian import SqueezedThermalParams
from qrev.one_mode import dual_witness, witness, z_min_exact
from qrev.oracle import (
    SdpInstance,
    level_set_feasible,
    solve_primal_bisection,
    solve_primal_grid,
    verify_dual,
)

Z_NU3_R1 = 0.50813046072242107


def test_instance_validation():
    with pytest.raises(UnphysicalStateError):
        SdpInstance.squeezed_thermal(0.5, 0.0)


@pytest.mark.parametrize("solve", [solve_primal_grid, solve_primal_bisection])
def test_oracle_examples(solve):
    assert solve(SdpInstance.squeezed_thermal(3.0, 0.0)).z_opt == pytest.approx(2.0 / 3.0, abs=1e-4)
    r = 0.9
    assert solve(SdpInstance.squeezed_thermal(np.cosh(2 * r), r)).z_opt <= 1e-4
    assert solve(SdpInstance.squeezed_thermal(3.0, 1.0)).z_opt == pytest.approx(Z_NU3_R1, abs=1e-4)


def test_grid_argmin_feasible_and_aligned():
    for nu, r in [(3.0, 0.0), (3.0, 1.0), (1.2, 0.05), (10.0, 1.9)]:
        res = solve_primal_grid(SdpInstance.squeezed_thermal(nu, r))
        assert res.feasibility_margin >= -1e-8
        assert res.alignment <= 1e-5 * max(1.0, res.z_opt)


def test_grid_resolution_floor():
    with pytest.raises(ValueError):
        solve_primal_grid(SdpInstance.squeezed_thermal(3.0, 0.0), grid_resolution=16)


def test_refinement_does_not_worsen_objective():
    inst = SdpInstance.squeezed_thermal(2.0, 0.7)
    z = [solve_primal_grid(inst, refinement_rounds=k).z_opt for k in (0, 2, 6)]
    assert z[2] <= z[1] + 1e-12 <= z[0] + 2e-12


@settings(max_examples=60, deadline=None)
@given(nu=st.floats(1.05, 12.0), r=st.floats(0.0, 2.0))
def test_oracle_not_below_exact(nu, r):
    # every oracle point is primal feasible, so it can only sit above the true minimum
    inst = SdpInstance.squeezed_thermal(nu, r)
    z = z_min_exact(SqueezedThermalParams(nu, r), 1.0).z_min
    res = solve_primal_bisection(inst)
    assert res.z_opt >= z - 1e-9


@settings(max_examples=200, deadline=None)
@given(nu=st.floats(1.0, 12.0), r=st.floats(0.0, 2.0), a=st.floats(0, 50), b=st.floats(0, 50),
       c=st.floats(-50, 50))
def test_c_zero_restriction_is_sound(nu, r, a, b, c):
    inst = SdpInstance.squeezed_thermal(nu, r)
    assert inst.min_eig(a, b, c) <= inst.min_eig(a, b, 0.0) + 1e-9 * (1 + abs(a) + abs(b))


@settings(max_examples=200, deadline=None)
@given(nu=st.floats(1.0, 12.0), r=st.floats(0.0, 2.0), a=st.floats(0, 50), b=st.floats(0, 50),
       c=st.floats(-5, 5))
def test_closed_form_min_eig(nu, r, a, b, c):
    inst = SdpInstance.squeezed_thermal(nu, r)
    numeric = np.linalg.eigvalsh(inst.constraint(a, b, c))[0]
    assert inst.scalar_min_eig(a, b, c) == pytest.approx(numeric, abs=1e-9 * (1 + a + b + abs(c)))


def test_level_set_monotone():
    inst = SdpInstance.squeezed_thermal(3.0, 1.0)
    assert not level_set_feasible(inst, 0.9 * Z_NU3_R1)
    assert level_set_feasible(inst, 1.1 * Z_NU3_R1)


def test_dual_examples():
    p = SqueezedThermalParams(3.0, 1.0)
    inst = SdpInstance.squeezed_thermal(3.0, 1.0)
    rep = verify_dual(inst, 3.0 / 2.0 * witness(p, +1))
    assert rep.feasible
    assert rep.value == pytest.approx(4 * (p.x - 1) / 2.0, rel=1e-12)

    rep = verify_dual(inst, np.zeros((2, 2)))
    assert not rep.feasible and rep.value == 0.0

    q = SqueezedThermalParams(3.0, 0.0)
    rep = verify_dual(SdpInstance.squeezed_thermal(3.0, 0.0), dual_witness(q))
    assert rep.feasible and rep.value == pytest.approx(2.0 / 3.0, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(nu=st.floats(1.05, 12.0), r=st.floats(0.0, 2.0))
def test_weak_duality(nu, r):
    p = SqueezedThermalParams(nu, r)
    inst = SdpInstance.squeezed_thermal(nu, r)
    dual = verify_dual(inst, dual_witness(p)).value
    primal = solve_primal_bisection(inst).z_opt
    assert dual <= primal + 1e-9


def test_dual_rejects_non_hermitian():
    with pytest.raises(ValueError):
        verify_dual(SdpInstance.squeezed_thermal(3.0, 0.0), np.array([[1, 1], [0, 1]]))
