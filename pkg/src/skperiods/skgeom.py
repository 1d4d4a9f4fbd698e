"""Special Kähler coordinates, metric samples, potential, radial scaling.

Coordinates are theta-periods over the symplectic basis: z^i over a-cycles,
w_i over b-cycles, with the b-orientation fixed so that Im tau is positive
definite, dw_j/dz^i = tau_ij, and the period-sum potential is positive on
the reference fixtures.  The Gram matrix Im tau splits into tangential (A),
mixed (B), and transverse (D) blocks by the degeneracy tags of the basis;
vanishing cycles are ordered last.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .contour import Component, Cycle, CycleBasis
from .errors import ModelSingular
from .periods import QuadConfig, dual_basis, integrate_cycle, period_matrices, tau
from .surface import THETA, HyperellipticCurve
from .polyfield import ComplexPoly


@dataclass(frozen=True)
class SKCoordinates:
    z: np.ndarray           # theta-periods over a-cycles
    w: np.ndarray           # theta-periods over b-cycles
    tags: tuple             # indices of vanishing entries of z (ordered last)
    branch_tag: str = "base"

    @property
    def z_van(self):
        return self.z[list(self.tags)]


def coordinates(curve: HyperellipticCurve, basis: CycleBasis,
                cfg: QuadConfig = QuadConfig(),
                branch_tag: str = "base") -> SKCoordinates:
    z = np.array([integrate_cycle(curve, c, THETA, cfg)[0]
                  for c in basis.a_cycles])
    w = np.array([integrate_cycle(curve, c, THETA, cfg)[0]
                  for c in basis.b_cycles])
    return SKCoordinates(z=z, w=w, tags=basis.degeneracy_tags,
                         branch_tag=branch_tag)


@dataclass(frozen=True)
class SKMetricSample:
    gram: np.ndarray        # Im tau, real symmetric
    tags: tuple             # transverse index set
    tau: np.ndarray = field(repr=False, default=None)
    symmetry_defect: float = 0.0
    dual_residual: float = 0.0
    condition: float = 1.0

    @property
    def tangential_idx(self):
        return [i for i in range(self.gram.shape[0]) if i not in self.tags]

    @property
    def A_block(self):
        t = self.tangential_idx
        return self.gram[np.ix_(t, t)]

    @property
    def B_block(self):
        t = self.tangential_idx
        return self.gram[np.ix_(t, list(self.tags))]

    @property
    def D_block(self):
        d = list(self.tags)
        return self.gram[np.ix_(d, d)]

    @property
    def min_eig_A(self):
        if self.A_block.size == 0:
            return np.inf
        return float(np.linalg.eigvalsh(self.A_block).min())


def metric(curve: HyperellipticCurve, basis: CycleBasis,
           cfg: QuadConfig = QuadConfig()) -> SKMetricSample:
    pm = period_matrices(curve, basis, cfg)
    db = dual_basis(pm)
    tm = tau(curve, basis, db, cfg)
    gram = 0.5 * (tm.tau.imag + tm.tau.imag.T)
    return SKMetricSample(gram=gram, tags=basis.degeneracy_tags, tau=tm.tau,
                          symmetry_defect=tm.symmetry_defect,
                          dual_residual=db.residual, condition=pm.condition)


@dataclass(frozen=True)
class PotentialSample:
    K: float
    imag_residue: float
    gradient: np.ndarray = None


def potential(coords: SKCoordinates) -> PotentialSample:
    """Period-sum Kähler potential; manifestly real up to rounding."""
    Kc = 0.25j * np.sum(coords.w * np.conj(coords.z) -
                        coords.z * np.conj(coords.w))
    return PotentialSample(K=float(Kc.real), imag_residue=abs(float(Kc.imag)))


def potential_gradient(coords: SKCoordinates, tau_matrix: np.ndarray) -> np.ndarray:
    """Holomorphic gradient dK/dz^j from the closed form."""
    return -0.25j * (np.conj(coords.w) - tau_matrix @ np.conj(coords.z))


def compare_model(sample: SKMetricSample, coords: SKCoordinates,
                  log_weight: bool = True):
    """Generalized eigenvalue range of the Gram matrix against the local
    model: identity on tangential entries, -log|z_van| on the transverse
    diagonal.  log_weight=False drops the log factor (negative control)."""
    n = sample.gram.shape[0]
    wts = np.ones(n)
    for k in sample.tags:
        zv = abs(coords.z[k])
        if zv >= 1.0:
            raise ModelSingular(f"|z_van| = {zv:g} >= 1; rescale the family")
        if log_weight:
            wts[k] = -np.log(zv)
    model = np.diag(wts)
    ev = scipy.linalg.eigh(sample.gram, model, eigvals_only=True)
    return float(ev.min()), float(ev.max())


# ---------------------------------------------------------------------------
# radial scaling  Q -> l Q

def scale_curve(curve: HyperellipticCurve, l: complex) -> HyperellipticCurve:
    """The curve y^2 = l Q(z): same roots, scaled leading coefficient."""
    Q = ComplexPoly(tuple(complex(l) * c for c in curve.Q.coeffs))
    return HyperellipticCurve(Q=Q, rootset=curve.rootset, branch=curve.branch,
                              genus=curve.genus)


def scale_basis(basis: CycleBasis, curve: HyperellipticCurve,
                l: complex) -> CycleBasis:
    """Transport the basis to y^2 = l Q: paths unchanged, anchors scaled by
    the principal sqrt(l) (consistent branch over a sector avoiding the
    negative real axis)."""
    from .contour import _anchor_seed
    s = complex(np.sqrt(complex(l)))

    def move(cycle):
        comps = []
        for cp in cycle.components:
            y0 = _anchor_seed(curve, cp)
            comps.append(replace(cp, y_anchor=s * y0))
        return Cycle(components=tuple(comps), closed=cycle.closed)

    return CycleBasis(
        a_cycles=tuple(move(c) for c in basis.a_cycles),
        b_cycles=tuple(move(c) for c in basis.b_cycles),
        intersection=basis.intersection,
        degeneracy_tags=basis.degeneracy_tags,
        pair_loops=tuple(move(c) if c is not None else None
                         for c in basis.pair_loops),
        plan=basis.plan)


@dataclass(frozen=True)
class RadialReport:
    C0: float
    l_grid: tuple
    tau_residuals: tuple      # max |tau(l) - tau(1)| per grid point
    K_residuals: tuple        # |K(l)/|l| - K(1)| / |K(1)|
    z_exponent: float         # fitted exponent of |z^1(l)| against |l|
    cone_angle: float         # 2*pi*fitted exponent
    K1: float


def radial_scan(curve: HyperellipticCurve, basis: CycleBasis, l_grid,
                cfg: QuadConfig = QuadConfig()) -> RadialReport:
    base = metric(curve, basis, cfg)
    coords1 = coordinates(curve, basis, cfg)
    K1 = potential(coords1).K
    tau_res, K_res, zs, ls = [], [], [], []
    for l in l_grid:
        cl = scale_curve(curve, l)
        bl = scale_basis(basis, curve, l)
        sm = metric(cl, bl, cfg)
        cl_coords = coordinates(cl, bl, cfg)
        Kl = potential(cl_coords).K
        tau_res.append(float(np.max(np.abs(sm.tau - base.tau))))
        K_res.append(abs(Kl / abs(l) - K1) / abs(K1))
        zs.append(abs(cl_coords.z[0]))
        ls.append(abs(l))
    slope = float(np.polyfit(np.log(ls), np.log(zs), 1)[0]) if len(ls) > 1 else 0.5
    return RadialReport(C0=K1 / 2.0, l_grid=tuple(complex(l) for l in l_grid),
                        tau_residuals=tuple(tau_res), K_residuals=tuple(K_res),
                        z_exponent=slope, cone_angle=2.0 * np.pi * slope, K1=K1)
