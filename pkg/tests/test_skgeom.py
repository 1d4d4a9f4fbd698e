import numpy as np
import pytest

from skperiods.contour import build_cycle_basis, deform_basis
from skperiods.errors import ModelSingular
from skperiods.periods import QuadConfig
from skperiods.polyfield import ComplexPoly
from skperiods.skgeom import (SKCoordinates, SKMetricSample, compare_model,
                              coordinates, metric, potential,
                              potential_gradient, scale_basis, scale_curve)


def test_f1_potential_frozen_value(f1_base, quad):
    curve, basis = f1_base
    coords = coordinates(curve, basis, quad)
    pot = potential(coords)
    assert abs(pot.K - 3.135442549707921) < 1e-8
    assert pot.imag_residue < 1e-12
    assert pot.K > 0


def test_metric_riemann_relations(f1_base, quad):
    curve, basis = f1_base
    s = metric(curve, basis, quad)
    assert s.symmetry_defect < 1e-10
    assert np.linalg.eigvalsh(s.gram).min() > 0
    assert s.dual_residual < 1e-10


def test_gradient_matches_finite_differences(f1, f1_base, quad):
    """dK along the curve family direction z^k dz^2, via the chain rule
    dK/du = 2 Re sum_j g_j dz^j/du, against centered differences of K."""
    from skperiods.scans import _perturbed_curve
    curve, basis = f1_base
    coords = coordinates(curve, basis, quad)
    s = metric(curve, basis, quad)
    grad = potential_gradient(coords, s.tau)
    n = len(curve.rootset.flat())
    h = 1e-5
    direction = ComplexPoly((0j, 1.0 + 0j))   # u z dz^2
    vals = {}
    for sgn in (1, -1):
        cp = _perturbed_curve(curve, direction, sgn * h)
        bp = deform_basis(basis, curve, cp, list(range(n)))
        c = coordinates(cp, bp, quad)
        vals[sgn] = (potential(c).K, c.z)
    dK = (vals[1][0] - vals[-1][0]) / (2 * h)
    dz = (vals[1][1] - vals[-1][1]) / (2 * h)
    pred = 2.0 * np.sum(grad * dz).real
    assert abs(dK - pred) < 1e-5 * max(1.0, abs(dK))


def test_compare_model_interval(f1_base, quad):
    curve, basis = f1_base
    s = metric(curve, basis, quad)
    coords = coordinates(curve, basis, quad)
    lo, hi = compare_model(s, coords, log_weight=True)
    assert 0 < lo <= hi < np.inf


def test_compare_model_singular_guard():
    coords = SKCoordinates(z=np.array([2.0 + 0j]), w=np.array([1j]), tags=(0,))
    sample = SKMetricSample(gram=np.eye(1), tags=(0,))
    with pytest.raises(ModelSingular):
        compare_model(sample, coords)


def test_radial_scaling_of_coordinates(f1_base, quad):
    """Under Q -> l Q all theta-periods scale by the principal sqrt(l)."""
    curve, basis = f1_base
    coords1 = coordinates(curve, basis, quad)
    l = 1.7 * np.exp(0.3j)
    cl = scale_curve(curve, l)
    bl = scale_basis(basis, curve, l)
    coords_l = coordinates(cl, bl, quad)
    s = np.sqrt(l)
    assert np.max(np.abs(coords_l.z - s * coords1.z)) < 1e-10
    assert np.max(np.abs(coords_l.w - s * coords1.w)) < 1e-10


def test_potential_scales_linearly(f1_base, quad):
    curve, basis = f1_base
    K1 = potential(coordinates(curve, basis, quad)).K
    l = 2.5 * np.exp(0.1j)
    cl = scale_curve(curve, l)
    bl = scale_basis(basis, curve, l)
    Kl = potential(coordinates(cl, bl, quad)).K
    assert abs(Kl - abs(l) * K1) < 1e-9 * abs(K1)
