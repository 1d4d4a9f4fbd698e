"""Numerical laboratory for period matrices of degenerating hyperelliptic
curves y^2 = Q(z) and the asymptotics of the associated special Kähler
metric near the discriminant."""

__version__ = "0.1.0"

from .errors import SKPeriodsError, ConfigError, NumericAbort
from .polyfield import ComplexPoly, roots, match_roots
from .surface import HyperellipticCurve, THETA
from .contour import PairingPlan, build_cycle_basis, deform_basis
from .periods import QuadConfig, period_matrices, dual_basis, tau, residue
from .families import FamilyConfig, load_config, bundled_config
from .skgeom import coordinates, metric, potential, radial_scan
from .scans import degeneration_scan, monodromy, jacobian_check

__all__ = [
    "__version__",
    "SKPeriodsError", "ConfigError", "NumericAbort",
    "ComplexPoly", "roots", "match_roots",
    "HyperellipticCurve", "THETA",
    "PairingPlan", "build_cycle_basis", "deform_basis",
    "QuadConfig", "period_matrices", "dual_basis", "tau", "residue",
    "FamilyConfig", "load_config", "bundled_config",
    "coordinates", "metric", "potential", "radial_scan",
    "degeneration_scan", "monodromy", "jacobian_check",
]
