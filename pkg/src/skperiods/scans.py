"""Ladder drivers and fits: degeneration scans, monodromy loops, Jacobian
finite-difference checks, and the regression machinery that classifies Gram
entries as log-divergent or continuous.

The cycle basis is built once at the ladder head and transported
sequentially; per-row period evaluation is independent of the other rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contour import build_cycle_basis, deform_basis
from .errors import InsufficientRows, StepTooLarge
from .families import FamilyConfig
from .periods import QuadConfig, integrate_cycle
from .polyfield import ComplexPoly, match_roots, roots as find_roots
from .skgeom import SKCoordinates, SKMetricSample, coordinates, metric
from .surface import THETA, HyperellipticCurve


@dataclass(frozen=True)
class ScanRow:
    eps: float
    z_van_abs: tuple
    coords: SKCoordinates
    sample: SKMetricSample
    err_est: float
    pair_z: tuple = ()        # theta-periods of single-pair loops (None where
                              # the plan pair carries no loop)


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    t_stat: float
    classification: str       # "divergent" | "continuous"


@dataclass(frozen=True)
class DegenerationReport:
    family: FamilyConfig
    rows: tuple
    fits: dict                # (i, j) -> FitResult on gram entry vs -log|z_van|


def _identity_matching(n):
    return list(range(n))


def _transport_to(basis, old_curve, new_curve, max_substeps=8):
    """Transport with automatic substepping when a single hop violates the
    displacement bound."""
    n = len(old_curve.rootset.flat())
    try:
        return deform_basis(basis, old_curve, new_curve, _identity_matching(n))
    except StepTooLarge:
        pass
    old = np.array(old_curve.rootset.flat())
    new = np.array(new_curve.rootset.flat())
    cur_curve, cur_basis = old_curve, basis
    for k in range(1, max_substeps + 1):
        frac = k / max_substeps
        mid = old + frac * (new - old)
        mid_curve = (new_curve if k == max_substeps else
                     HyperellipticCurve.from_roots(list(mid)))
        cur_basis = deform_basis(cur_basis, cur_curve, mid_curve,
                                 _identity_matching(n))
        cur_curve = mid_curve
    return cur_basis


def degeneration_scan(family: FamilyConfig, ladder=None,
                      cfg: QuadConfig = None) -> DegenerationReport:
    if ladder is None:
        ladder = family.ladder()
    if cfg is None:
        cfg = family.quad
    def _size(e):
        return max(abs(v) for v in e) if hasattr(e, "__len__") else abs(e)
    ladder = sorted(ladder, key=_size, reverse=True)
    curve = family.curve_at(ladder[0])
    basis = build_cycle_basis(curve, family.plan())
    rows = []
    for k, eps in enumerate(ladder):
        if k > 0:
            new_curve = family.curve_at(eps)
            basis = _transport_to(basis, curve, new_curve)
            curve = new_curve
        sample = metric(curve, basis, cfg)
        coords = coordinates(curve, basis, cfg, branch_tag=f"ladder:{k}")
        pair_z = tuple(
            complex(integrate_cycle(curve, c, THETA, cfg)[0]) if c is not None
            else None for c in basis.pair_loops)
        rows.append(ScanRow(
            eps=float(abs(eps)) if not hasattr(eps, "__len__") else float(abs(eps[0])),
            z_van_abs=tuple(float(abs(v)) for v in coords.z_van),
            coords=coords, sample=sample, pair_z=pair_z,
            err_est=max(sample.symmetry_defect, sample.dual_residual)))
    report = DegenerationReport(family=family, rows=tuple(rows), fits={})
    object.__setattr__(report, "fits", fit_log_rate(report))
    return report


def _ols(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    A = np.vstack([x, np.ones(n)]).T
    coef, res, _, _ = np.linalg.lstsq(A, y, rcond=None)
    slope, intercept = coef
    pred = A @ coef
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    # t-statistic of the slope
    dof = max(n - 2, 1)
    sigma2 = ss_res / dof
    sxx = float(np.sum((x - x.mean()) ** 2))
    se = np.sqrt(sigma2 / sxx) if sxx > 0 else np.inf
    t = abs(slope) / se if se > 0 else np.inf
    return slope, intercept, r2, t


def fit_log_rate(report: DegenerationReport) -> dict:
    """OLS of every Gram entry against -log|z_van| (mean over tagged pairs);
    an entry is divergent when the slope t-statistic exceeds 10 with
    R^2 >= 0.999."""
    rows = report.rows
    if len(rows) < 6:
        raise InsufficientRows(f"{len(rows)} rows < 6")
    x = [float(np.mean([-np.log(v) for v in r.z_van_abs])) for r in rows]
    g = rows[0].sample.gram.shape[0]
    fits = {}
    for i in range(g):
        for j in range(i, g):
            y = [r.sample.gram[i, j] for r in rows]
            slope, intercept, r2, t = _ols(x, y)
            cls = "divergent" if (t > 10 and r2 >= 0.999) else "continuous"
            fits[(i, j)] = FitResult(slope=slope, intercept=intercept,
                                     r_squared=r2, t_stat=t, classification=cls)
    return fits


# ---------------------------------------------------------------------------
# monodromy

@dataclass(frozen=True)
class MonodromyResult:
    eps0: float
    steps: int
    turns: int
    shifts: tuple             # integer n per b-cycle
    defects: tuple            # |n - round(n)| per b-cycle
    a_return_defect: float


def monodromy(family: FamilyConfig, eps0: float, steps: int = 64,
              turns: int = 1, cfg: QuadConfig = None) -> MonodromyResult:
    """Transport the basis around eps(t) = eps0 * exp(2 pi i t) and report
    the integer shifts n_k = (w_after - w_before)_k / z^k."""
    if cfg is None:
        cfg = family.quad
    curve0 = family.curve_at(eps0)
    basis = build_cycle_basis(curve0, family.plan())
    c_before = coordinates(curve0, basis, cfg, branch_tag="loop:0")
    curve = curve0
    total = steps * turns
    for s in range(1, total + 1):
        eps = eps0 * np.exp(2j * np.pi * s / steps)
        new_curve = (curve0 if s == total else family.curve_at(eps))
        basis = _transport_to(basis, curve, new_curve)
        curve = new_curve
    c_after = coordinates(curve0, basis, cfg, branch_tag=f"loop:{turns}")
    dz = np.max(np.abs(c_after.z - c_before.z))
    scale = max(np.max(np.abs(c_before.z)), 1e-30)
    dw = c_after.w - c_before.w
    ns, defects = [], []
    for k in range(len(dw)):
        ratio = dw[k] / c_before.z[k]
        n = round(ratio.real)
        ns.append(int(n))
        defects.append(float(abs(ratio - n)))
    return MonodromyResult(eps0=eps0, steps=steps, turns=turns,
                           shifts=tuple(ns), defects=tuple(defects),
                           a_return_defect=float(dz / scale))


# ---------------------------------------------------------------------------
# Jacobian identity

def _perturbed_curve(curve: HyperellipticCurve, direction: ComplexPoly, u: float):
    Qp = curve.Q + (u * direction)
    rs = find_roots(Qp)
    perm = match_roots(curve.rootset, rs)
    n = len(curve.rootset.flat())
    lst = [rs.flat()[perm[i]] for i in range(n)]
    return HyperellipticCurve.from_roots(lst)


def jacobian_check(curve: HyperellipticCurve, basis, cfg: QuadConfig = None,
                   h: float = 1e-5) -> float:
    """Relative deviation between tau and the finite-difference dw/dz taken
    along the monomial directions Q + u z^k, Richardson-extrapolated."""
    if cfg is None:
        cfg = QuadConfig()
    g = curve.genus
    sample = metric(curve, basis, cfg)
    n = len(curve.rootset.flat())

    def fd(step):
        Z = np.zeros((g, g), dtype=complex)
        W = np.zeros((g, g), dtype=complex)
        for k in range(g):
            direction = ComplexPoly(tuple([0j] * k + [1.0]))
            cp = _perturbed_curve(curve, direction, step)
            cm = _perturbed_curve(curve, direction, -step)
            bp = deform_basis(basis, curve, cp, _identity_matching(n))
            bm = deform_basis(basis, curve, cm, _identity_matching(n))
            pp = coordinates(cp, bp, cfg)
            pm = coordinates(cm, bm, cfg)
            Z[:, k] = (pp.z - pm.z) / (2 * step)
            W[:, k] = (pp.w - pm.w) / (2 * step)
        return Z, W

    Z1, W1 = fd(h)
    Z2, W2 = fd(h / 2)
    Z = (4 * Z2 - Z1) / 3
    W = (4 * W2 - W1) / 3
    tau_fd = (W @ np.linalg.inv(Z)).T
    return float(np.max(np.abs(tau_fd - sample.tau)) /
                 np.max(np.abs(sample.tau)))


# ---------------------------------------------------------------------------
# tangential limit

def tangential_gram_limit(family: FamilyConfig, cfg: QuadConfig = None):
    """Gram matrix of the reduced cycle set on the degenerate curve, for
    comparison with the tangential block of ladder samples."""
    from .families import degenerate_reduced
    if cfg is None:
        cfg = family.quad
    curve, plan = degenerate_reduced(family)
    basis = build_cycle_basis(curve, plan)
    return metric(curve, basis, cfg).gram
