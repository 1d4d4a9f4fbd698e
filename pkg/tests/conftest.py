import time

import numpy as np
import pytest

from skperiods.contour import PairingPlan, build_cycle_basis
from skperiods.families import bundled_config
from skperiods.periods import QuadConfig
from skperiods.scans import degeneration_scan
from skperiods.surface import HyperellipticCurve


@pytest.fixture(scope="session")
def f1():
    return bundled_config("f1")


@pytest.fixture(scope="session")
def f3():
    return bundled_config("f3")


@pytest.fixture(scope="session")
def r1():
    return bundled_config("r1")


@pytest.fixture(scope="session")
def f1_scan(f1):
    """(report, wall-clock seconds) for the full f1 ladder."""
    t0 = time.time()
    rep = degeneration_scan(f1)
    return rep, time.time() - t0


@pytest.fixture(scope="session")
def f3_scan(f3):
    t0 = time.time()
    rep = degeneration_scan(f3)
    return rep, time.time() - t0


@pytest.fixture(scope="session")
def f1_base(f1):
    """Curve and basis for the f1 family at eps = 0.1."""
    curve = f1.curve_at(0.1)
    basis = build_cycle_basis(curve, f1.plan())
    return curve, basis


@pytest.fixture(scope="session")
def lemniscatic():
    """y^2 = z^4 - 1, whose period ratio is exactly i."""
    curve = HyperellipticCurve.from_roots([1.0, 1.0j, -1.0, -1.0j])
    basis = build_cycle_basis(
        curve, PairingPlan(pairs=((0, 1), (2, 3)), collision_tags=()))
    return curve, basis


@pytest.fixture(scope="session")
def quad():
    return QuadConfig()


def random_separated_roots(rng, n, min_sep=0.4):
    while True:
        pts = rng.standard_normal(n) * 1.5 + 1j * rng.standard_normal(n) * 0.6
        pts = sorted(pts, key=lambda z: (z.real, z.imag))
        if all(abs(pts[i] - pts[j]) > min_sep
               for i in range(n) for j in range(i + 1, n)):
            return [complex(p) for p in pts]
