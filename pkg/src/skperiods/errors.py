"""Exception hierarchy shared by all modules.

Every failure mode named in the interface contracts maps to one class here,
so callers can distinguish config problems, numerical aborts, and genuine
assertion failures.
"""


class SKPeriodsError(Exception):
    """Base class for all package errors."""


class ConfigError(SKPeriodsError):
    """Malformed family configuration or CLI input."""


class NumericAbort(SKPeriodsError):
    """Numerical failure: the computation cannot proceed at this precision."""


# --- polyfield ---

class NonConvergence(NumericAbort):
    """Root refinement residual stayed above tolerance."""


class AmbiguousMatching(NumericAbort):
    """Two root pairings differ in cost by less than the guard ratio."""


# --- surface ---

class OddTotalParity(ConfigError):
    """Odd number of odd-parity branch clusters (degree-parity violation)."""


class DegenerateCover(SKPeriodsError):
    """No odd clusters: the double cover disconnects (abelian-stratum limit)."""


class PathThroughBranchPoint(SKPeriodsError):
    """Path interior violates the clearance margin around a branch point."""


class StepLimitExceeded(NumericAbort):
    """Adaptive subdivision exceeded its depth cap."""


class FitUnstable(NumericAbort):
    """Regression quality below the acceptance threshold."""


# --- contour ---

class ClusterCrowded(SKPeriodsError):
    """Cluster separation precondition for a vanishing loop fails."""


class NoRoute(SKPeriodsError):
    """Obstacle detours could not produce a simple path within the budget."""


class PlanInconsistent(ConfigError):
    """Pairing plan does not produce a symplectic basis of the right rank."""


class StepTooLarge(SKPeriodsError):
    """Root displacement exceeds the basis-transport step bound."""


# --- periods ---

class ToleranceNotMet(NumericAbort):
    """Quadrature refinement exhausted max_depth above tolerance."""


class PoleOnPath(SKPeriodsError):
    """A pole of the integrand lies on the interior of the path."""


class IllConditioned(NumericAbort):
    """a-period matrix condition estimate above the cap."""


# --- skgeom / scans ---

class ModelSingular(SKPeriodsError):
    """Model metric weight nonpositive (some |z_van| >= 1)."""


class InsufficientRows(ConfigError):
    """Not enough ladder rows for a regression."""
