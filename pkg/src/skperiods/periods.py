"""Adaptive contour quadrature and period matrices.

One Gauss-Kronrod (G7/K15) kernel integrates every form along polyline
pieces with the square root continued through the quadrature nodes.  A path
endpoint sitting exactly at a simple branch point is handled by the local
substitution z = r + t^2, which removes the 1/sqrt singularity; the
substituted piece is still a straight line in z, so continuation applies
unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contour import Component, Cycle, CycleBasis, Path, component_vertex_sheets
from .errors import ConfigError, IllConditioned, PoleOnPath, ToleranceNotMet
from .polyfield import ComplexPoly
from .surface import HyperellipticCurve, MeromorphicForm, Theta, continue_values

# 15-point Kronrod extension of 7-point Gauss, ascending nodes on [-1, 1];
# Gauss nodes are the odd-indexed Kronrod nodes.
_XK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813])
_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870])


@dataclass(frozen=True)
class QuadConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    max_depth: int = 40
    endpoint_rule: str = "substitution"

    def __post_init__(self):
        if self.rel_tol < 1e-13:
            raise ConfigError("rel_tol below 1e-13 is not supported")
        if self.max_depth > 40:
            raise ConfigError("max_depth capped at 40")


def _form_values(form, zs, ys):
    if isinstance(form, Theta):
        return ys
    if isinstance(form, MeromorphicForm):
        return form.numerator(zs) / (2.0 * ys)
    raise TypeError(f"unknown form {form!r}")


class _Piece:
    """Straight piece z(t) = z0 + (z1 - z0) * phi(t), t in [0, 1], with an
    optional square-root substitution phi(t) = t^2 at a root endpoint."""

    def __init__(self, z0, z1, sqrt_subst=False, orient=1.0):
        self.z0 = complex(z0)
        self.z1 = complex(z1)
        self.sqrt_subst = sqrt_subst
        self.orient = orient    # +-1: sign of traversal in the parent path

    def z(self, t):
        d = self.z1 - self.z0
        if self.sqrt_subst:
            return self.z0 + d * t * t
        return self.z0 + d * t

    def dz(self, t):
        d = self.z1 - self.z0
        if self.sqrt_subst:
            return 2.0 * d * t
        return d + 0.0 * t


def _kronrod_cell(Q, form, piece, a, b, y_seed, seed_at_b, g=None):
    """One K15/G7 evaluation on [a, b] of the piece parameter.

    y_seed is y at z(b) when seed_at_b else at z(a).  Returns
    (IK, diff, y_mid) with y_mid the continued value at the cell center.

    When g is given (substituted pieces; g(z) = (z1 - z0) Q(z)/(z - z0)),
    the continuation runs on w = y/t with w^2 = g(z(t)): g is smooth and
    nonzero near the root, so the sheet tracking stays well conditioned
    arbitrarily close to the branch point."""
    h = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    ts = mid + h * _XK
    zs = piece.z(ts)
    fn = Q if g is None else g
    seed = y_seed if g is None else y_seed / (b if seed_at_b else a)
    if seed_at_b:
        chain = np.concatenate([[piece.z(b)], zs[::-1]])
        ys = continue_values(fn, chain, seed)[1:][::-1]
    else:
        chain = np.concatenate([[piece.z(a)], zs])
        ys = continue_values(fn, chain, seed)[1:]
    if g is not None:
        ys = ts * ys
    vals = _form_values(form, zs, ys) * piece.dz(ts)
    ik = h * float(np.sum(_WK * vals.real)) + 1j * h * float(np.sum(_WK * vals.imag))
    ig = h * complex(np.sum(_WG * vals[1::2]))
    return ik, abs(ik - ig), complex(ys[7])


def _integrate_piece(Q, form, piece, y_seed, seed_at_b, cfg: QuadConfig,
                     g=None):
    """Adaptive refinement over the piece parameter [0, 1]."""
    ik0, d0, ymid0 = _kronrod_cell(Q, form, piece, 0.0, 1.0, y_seed, seed_at_b, g)
    scale = max(abs(ik0), cfg.abs_tol)
    total = 0.0 + 0.0j
    err = 0.0
    stack = [(0.0, 1.0, y_seed, seed_at_b, ik0, d0, ymid0, 0)]
    while stack:
        a, b, ys_, sab, ik, d, ymid, depth = stack.pop()
        tol_cell = max(cfg.abs_tol, cfg.rel_tol * scale) * (b - a)
        # once the cell error is at machine-roundoff scale relative to the
        # whole integral, splitting further cannot improve it
        floor = 1e-14 * scale
        if d <= max(tol_cell, floor):
            total += ik
            err += d
            continue
        if depth >= cfg.max_depth:
            raise ToleranceNotMet(
                f"cell [{a},{b}] error {d:g} > {tol_cell:g} at depth cap")
        m = 0.5 * (a + b)
        if sab:
            left = (a, m, ymid, True)
            right = (m, b, ys_, True)
        else:
            left = (a, m, ys_, False)
            right = (m, b, ymid, False)
        for (aa, bb, yy, ss) in (left, right):
            ikc, dc, ymc = _kronrod_cell(Q, form, piece, aa, bb, yy, ss, g)
            stack.append((aa, bb, yy, ss, ikc, dc, ymc, depth + 1))
    return total, err


def _component_pieces(comp: Component):
    """Split the component path into pieces, substituting at root ends."""
    v = comp.path.vertices
    pieces = []
    for k in range(len(v) - 1):
        if k == 0 and comp.path.root_start:
            pieces.append(("in", _Piece(v[0], v[1], sqrt_subst=True, orient=1.0), k))
        elif k == len(v) - 2 and comp.path.root_end:
            pieces.append(("in", _Piece(v[k + 1], v[k], sqrt_subst=True, orient=-1.0), k))
        else:
            pieces.append(("fwd", _Piece(v[k], v[k + 1]), k))
    return pieces


def _check_interior_clearance(curve, path: Path):
    v = path.vertices
    floor = 1e-9 * max(1.0, curve.diameter)
    for r in curve.rootset.flat():
        if (path.root_start and abs(r - v[0]) < floor) or \
           (path.root_end and abs(r - v[-1]) < floor):
            continue
        for k in range(len(v) - 1):
            from .surface import _dist_point_segment
            if _dist_point_segment(r, v[k], v[k + 1]) < floor:
                raise PoleOnPath(f"root {r} on path interior")


def integrate_component(curve: HyperellipticCurve, comp: Component, form,
                        cfg: QuadConfig):
    """Weighted integral of the form along one sheet-labeled component."""
    _check_interior_clearance(curve, comp.path)
    sheets = component_vertex_sheets(curve, comp)
    if cfg.endpoint_rule != "substitution" and (comp.path.root_start or
                                                comp.path.root_end):
        raise PoleOnPath("path ends at a branch point without substitution")
    total = 0.0 + 0.0j
    err = 0.0
    for kind, piece, k in _component_pieces(comp):
        if kind == "in":
            # substituted piece runs from the root (t=0) to the interior
            # vertex (t=1); seed continuation at the interior end
            y_seed = sheets[k + 1] if piece.orient > 0 else sheets[k]
            L = piece.z1 - piece.z0
            root = piece.z0

            def g(z, c=curve, r=root, d=L):
                return d * c.q_deflated(z, r)

            val, e = _integrate_piece(curve.q_eval, form, piece, y_seed,
                                      seed_at_b=True, cfg=cfg, g=g)
            total += piece.orient * val
        else:
            val, e = _integrate_piece(curve.q_eval, form, piece, sheets[k],
                                      seed_at_b=False, cfg=cfg)
            total += val
        err += e
    return comp.weight * total, abs(comp.weight) * err


def integrate_cycle(curve: HyperellipticCurve, cycle: Cycle, form,
                    cfg: QuadConfig):
    total = 0.0 + 0.0j
    err = 0.0
    for comp in cycle.components:
        v, e = integrate_component(curve, comp, form, cfg)
        total += v
        err += e
    return total, err


def integrate_form(curve: HyperellipticCurve, path: Path, sheet: int, form,
                   cfg: QuadConfig = QuadConfig()):
    """Integral along a single lift of the path; the sheet sign selects the
    branch of sqrt(Q) (relative to the principal value) at the anchor vertex
    in the middle of the path."""
    k0 = len(path.vertices) // 2
    if (path.root_start or path.root_end) and k0 in (0, len(path.vertices) - 1):
        raise PoleOnPath("path too short to anchor off its branch endpoints")
    y0 = sheet * complex(np.sqrt(curve.Q(path.vertices[k0])))
    comp = Component(path=path, y_anchor=y0, anchor_idx=k0, weight=1.0,
                     kind="lift", root_meta=())
    return integrate_cycle(curve, Cycle(components=(comp,)), form, cfg)


# ---------------------------------------------------------------------------
# period matrices

@dataclass(frozen=True)
class PeriodMatrix:
    A: np.ndarray          # A[i][j] = int_{a_i} z^j dz/(2y)
    B: np.ndarray          # over b-cycles
    A_err: np.ndarray
    B_err: np.ndarray
    condition: float
    curve: HyperellipticCurve = field(repr=False, default=None)
    basis: CycleBasis = field(repr=False, default=None)
    cfg: QuadConfig = field(repr=False, default=None)


@dataclass(frozen=True)
class DifferentialBasis:
    numerators: tuple      # ComplexPoly per basis form omega_j
    residual: float        # max |int_{a_i} omega_j - delta_ij|


@dataclass(frozen=True)
class TauMatrix:
    tau: np.ndarray
    symmetry_defect: float
    err: np.ndarray


def _monomial_forms(g):
    return [MeromorphicForm(ComplexPoly(tuple([0j] * j + [1.0]))) for j in range(g)]


def period_matrices(curve: HyperellipticCurve, basis: CycleBasis,
                    cfg: QuadConfig = QuadConfig()) -> PeriodMatrix:
    g = curve.genus
    forms = _monomial_forms(g)
    A = np.zeros((g, g), dtype=complex)
    B = np.zeros((g, g), dtype=complex)
    Ae = np.zeros((g, g))
    Be = np.zeros((g, g))
    for j, form in enumerate(forms):
        for i, cyc in enumerate(basis.a_cycles):
            A[i, j], Ae[i, j] = integrate_cycle(curve, cyc, form, cfg)
        for i, cyc in enumerate(basis.b_cycles):
            B[i, j], Be[i, j] = integrate_cycle(curve, cyc, form, cfg)
    cond = float(np.linalg.cond(A))
    return PeriodMatrix(A=A, B=B, A_err=Ae, B_err=Be, condition=cond,
                        curve=curve, basis=basis, cfg=cfg)


_COND_CAP = 1e10


def dual_basis(pm: PeriodMatrix, recheck: bool = True) -> DifferentialBasis:
    """Numerator polynomials of the a-normalized basis: columns of A^{-1}
    in the monomial basis; the normalization residual is recomputed by
    re-integration."""
    if not np.isfinite(pm.condition) or pm.condition > _COND_CAP:
        raise IllConditioned(f"cond(A) = {pm.condition:g}")
    g = pm.A.shape[0]
    X = np.linalg.solve(pm.A, np.eye(g))
    numerators = tuple(ComplexPoly(tuple(X[:, j])) for j in range(g))
    residual = 0.0
    if recheck:
        for j, num in enumerate(numerators):
            form = MeromorphicForm(num)
            for i, cyc in enumerate(pm.basis.a_cycles):
                v, _ = integrate_cycle(pm.curve, cyc, form, pm.cfg)
                residual = max(residual, abs(v - (1.0 if i == j else 0.0)))
    return DifferentialBasis(numerators=numerators, residual=residual)


def tau(curve: HyperellipticCurve, basis: CycleBasis, dual: DifferentialBasis,
        cfg: QuadConfig = QuadConfig()) -> TauMatrix:
    g = curve.genus
    T = np.zeros((g, g), dtype=complex)
    E = np.zeros((g, g))
    for i, num in enumerate(dual.numerators):
        form = MeromorphicForm(num)
        for j, cyc in enumerate(basis.b_cycles):
            T[i, j], E[i, j] = integrate_cycle(curve, cyc, form, cfg)
    defect = float(np.max(np.abs(T - T.T))) if g > 1 else 0.0
    return TauMatrix(tau=T, symmetry_defect=defect, err=E)


def residue(curve: HyperellipticCurve, form, point, cfg: QuadConfig = QuadConfig()):
    """(1/2pi i) times the loop integral around `point` = (z, sheet) on a
    small circle; evaluated at two radii and Richardson-extrapolated."""
    z0, sheet = point
    z0 = complex(z0)
    others = [r for r in curve.rootset.flat() if abs(r - z0) > 1e-12]
    clearance = min(abs(r - z0) for r in others) if others else 1.0
    vals = []
    for radius in (0.5 * clearance, 0.25 * clearance):
        th = 0.2337 + np.linspace(0.0, 2 * np.pi, 101)
        verts = z0 + radius * np.exp(1j * th)
        verts[-1] = verts[0]
        path = Path(vertices=tuple(verts))
        v, _ = integrate_form(curve, path, sheet, form, cfg)
        vals.append(v / (2j * np.pi))
    return vals[1] + (vals[1] - vals[0]) / 3.0
