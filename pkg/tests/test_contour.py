import numpy as np
import pytest

from skperiods.contour import (PairingPlan, build_cycle_basis, deform_basis,
                               intersection_number)
from skperiods.errors import PlanInconsistent, StepTooLarge
from skperiods.families import bundled_config
from skperiods.periods import QuadConfig, integrate_cycle, _monomial_forms
from skperiods.surface import THETA, HyperellipticCurve


def _normal(g):
    z = np.zeros((g, g), dtype=int)
    i = np.eye(g, dtype=int)
    return np.block([[z, i], [-i, z]])


def test_normal_form_lemniscatic(lemniscatic):
    curve, basis = lemniscatic
    assert np.array_equal(np.asarray(basis.intersection), _normal(1))


def test_normal_form_f1(f1):
    curve = f1.curve_at(f1.eps0)
    basis = build_cycle_basis(curve, f1.plan())
    assert np.array_equal(np.asarray(basis.intersection), _normal(2))
    assert basis.degeneracy_tags == (1,)


def test_normal_form_f3(f3):
    curve = f3.curve_at(f3.eps0)
    basis = build_cycle_basis(curve, f3.plan())
    assert np.array_equal(np.asarray(basis.intersection), _normal(3))
    assert basis.degeneracy_tags == (0, 1, 2)


def test_f3_b_cycles_are_single_lifts(f3):
    # the reduced b-cycles must stay single connecting lifts (two sheet
    # components each); mixing lifts across the chain contaminates the
    # divergence pattern of tau
    curve = f3.curve_at(f3.eps0)
    basis = build_cycle_basis(curve, f3.plan())
    for cyc in basis.b_cycles:
        assert len(cyc.components) == 2


def test_plan_validation(f1):
    curve = f1.curve_at(f1.eps0)
    with pytest.raises(PlanInconsistent):
        build_cycle_basis(curve, PairingPlan(pairs=((0, 1), (2, 3)),
                                             collision_tags=(0,)))


def test_intersection_antisymmetry(f1_base):
    curve, basis = f1_base
    cycles = list(basis.a_cycles) + list(basis.b_cycles)
    for i, ci in enumerate(cycles):
        for cj in cycles[i:]:
            assert abs(intersection_number(curve, ci, cj) +
                       intersection_number(curve, cj, ci)) < 1e-9


def test_capsule_width_independence():
    """A-periods are homotopy invariants: two capsule widths, same value."""
    from skperiods.contour import vanishing_loop
    from skperiods.periods import integrate_cycle
    curve = HyperellipticCurve.from_roots([-0.1, 0.1, 2.0, 3.0])
    form = _monomial_forms(1)[0]
    vals = []
    for wf in (0.5, 0.42, 0.31):
        loop = vanishing_loop(curve.branch, (0, 1), width_factor=wf)
        v, e = integrate_cycle(curve, loop, form, QuadConfig())
        vals.append(v)
    assert abs(vals[0] - vals[1]) < 1e-10 * abs(vals[0])
    assert abs(vals[0] - vals[2]) < 1e-10 * abs(vals[0])


def test_deform_basis_small_step_preserves_periods(f1):
    eps = 0.05
    curve = f1.curve_at(eps)
    basis = build_cycle_basis(curve, f1.plan())
    new_curve = f1.curve_at(eps * 1.01)
    n = len(curve.rootset.flat())
    moved = deform_basis(basis, curve, new_curve, list(range(n)))
    direct = build_cycle_basis(new_curve, f1.plan())
    for c1, c2 in zip(moved.a_cycles, direct.a_cycles):
        v1, _ = integrate_cycle(new_curve, c1, THETA, QuadConfig())
        v2, _ = integrate_cycle(new_curve, c2, THETA, QuadConfig())
        assert abs(v1 - v2) < 1e-8 * max(1.0, abs(v1))


def test_deform_basis_rejects_large_step(f1):
    curve = f1.curve_at(0.01)
    basis = build_cycle_basis(curve, f1.plan())
    far = f1.curve_at(0.2)
    n = len(curve.rootset.flat())
    with pytest.raises(StepTooLarge):
        deform_basis(basis, curve, far, list(range(n)))
