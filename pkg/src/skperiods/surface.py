"""Planar hyperelliptic curve model y^2 = Q(z).

Branch-point classification into odd/even clusters, the genus of the double
cover, analytic continuation of sqrt(Q) along paths with the continuity
selector, and the pullback of quadratic-differential numerators to
anti-invariant forms p(z) dz / (2y).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateCover,
    FitUnstable,
    OddTotalParity,
    PathThroughBranchPoint,
    StepLimitExceeded,
)
from .polyfield import ComplexPoly, RootSet, roots as find_roots


@dataclass(frozen=True)
class Cluster:
    center: complex
    members: tuple        # root values repeated with multiplicity
    parity: str           # "odd" | "even"

    @property
    def total_mult(self) -> int:
        return len(self.members)

    @property
    def diameter(self) -> float:
        if len(self.members) < 2:
            return 0.0
        ms = self.members
        return max(abs(a - b) for a in ms for b in ms)


@dataclass(frozen=True)
class BranchData:
    clusters: tuple       # of Cluster
    r_odd: int

    def odd_clusters(self):
        return [c for c in self.clusters if c.parity == "odd"]


def classify_branch_points(rs: RootSet, cluster_tol: float = 1e-9) -> BranchData:
    """Group roots into clusters by single-linkage at radius cluster_tol."""
    pts = rs.flat()
    n = len(pts)
    if n % 2 != 0:
        raise OddTotalParity("Q must have even degree")
    unused = list(range(n))
    clusters = []
    while unused:
        group = [unused.pop(0)]
        grew = True
        while grew:
            grew = False
            for j in list(unused):
                if any(abs(pts[j] - pts[i]) <= cluster_tol for i in group):
                    group.append(j)
                    unused.remove(j)
                    grew = True
        members = tuple(pts[i] for i in group)
        center = sum(members) / len(members)
        parity = "odd" if len(members) % 2 == 1 else "even"
        clusters.append(Cluster(center=center, members=members, parity=parity))
    clusters.sort(key=lambda c: (c.center.real, c.center.imag))
    r_odd = sum(1 for c in clusters if c.parity == "odd")
    if r_odd % 2 != 0:
        raise OddTotalParity(f"odd number of odd clusters: {r_odd}")
    return BranchData(clusters=tuple(clusters), r_odd=r_odd)


def genus(b: BranchData) -> int:
    """Genus of the double cover with two unramified points at infinity."""
    if b.r_odd == 0:
        raise DegenerateCover("no odd clusters: cover disconnects")
    return b.r_odd // 2 - 1


@dataclass(frozen=True)
class HyperellipticCurve:
    Q: ComplexPoly
    rootset: RootSet
    branch: BranchData
    genus: int

    @staticmethod
    def from_poly(Q: ComplexPoly, tol: float = 1e-11,
                  cluster_tol: float = 1e-9) -> "HyperellipticCurve":
        if Q.degree % 2 != 0 or Q.degree < 2:
            raise OddTotalParity("Q must have positive even degree")
        rs = find_roots(Q, tol)
        b = classify_branch_points(rs, cluster_tol)
        g = genus(b)
        return HyperellipticCurve(Q=Q, rootset=rs, branch=b, genus=g)

    @staticmethod
    def from_roots(root_list, leading=1.0, cluster_tol: float = 1e-9,
                   mults=None) -> "HyperellipticCurve":
        """Exact construction from known root motion (no numeric root find)."""
        if mults is None:
            mults = [1] * len(root_list)
        flat = []
        for r, m in zip(root_list, mults):
            flat.extend([complex(r)] * m)
        if len(flat) % 2 != 0:
            raise OddTotalParity("odd degree")
        Q = ComplexPoly.from_roots(flat, leading=leading)
        rs = RootSet(roots=tuple(root_list), mults=tuple(mults), residual=0.0)
        b = classify_branch_points(rs, cluster_tol)
        g = genus(b)
        return HyperellipticCurve(Q=Q, rootset=rs, branch=b, genus=g)

    def q_eval(self, z):
        """Q evaluated as leading * prod (z - r_i): full relative accuracy
        arbitrarily close to a root, where the coefficient (Horner) form is
        destroyed by cancellation."""
        zs = np.asarray(z, dtype=complex)
        out = np.full(zs.shape, complex(self.Q.coeffs[-1]))
        for r, m in zip(self.rootset.roots, self.rootset.mults):
            out = out * (zs - complex(r)) ** m
        return out if zs.shape else complex(out[()])

    def q_deflated(self, z, r0):
        """Q(z)/(z - r0) with one factor matching the root r0 removed;
        smooth and nonzero near r0."""
        zs = np.asarray(z, dtype=complex)
        out = np.full(zs.shape, complex(self.Q.coeffs[-1]))
        idx = min(range(len(self.rootset.roots)),
                  key=lambda i: abs(self.rootset.roots[i] - r0))
        if abs(self.rootset.roots[idx] - r0) > 1e-12 * max(1.0, abs(r0)):
            raise ValueError(f"{r0} is not a root")
        for i, (r, m) in enumerate(zip(self.rootset.roots, self.rootset.mults)):
            if i == idx:
                m -= 1
            if m:
                out = out * (zs - complex(r)) ** m
        return out if zs.shape else complex(out[()])

    @property
    def diameter(self) -> float:
        pts = self.rootset.flat()
        return max(abs(a - b) for a in pts for b in pts)

    def clearance_margin(self, factor: float = 1e-3) -> float:
        return factor * self.diameter


# ---------------------------------------------------------------------------
# sqrt continuation

_RATIO_LOG_CAP = 1.2   # |log|Q ratio|| beyond this forces subdivision
_DEPTH_CAP = 48


def _cont_step(Q, z0, q0, y0, z1, depth=0):
    """Continue y across one straight step, bisecting until the argument of
    Q changes by < pi/2 and the magnitude ratio stays tame."""
    q1 = Q(z1)
    ok = False
    if q0 != 0 and q1 != 0:
        r = q1 / q0
        ok = r.real > 0 and abs(np.log(abs(r))) < _RATIO_LOG_CAP
    if not ok:
        if depth >= _DEPTH_CAP:
            raise StepLimitExceeded("sqrt continuation subdivision cap hit")
        zm = 0.5 * (z0 + z1)
        ym, qm = _cont_step(Q, z0, q0, y0, zm, depth + 1)
        return _cont_step(Q, zm, qm, ym, z1, depth + 1)
    w = complex(np.sqrt(q1))
    # continuity selector |y1 - y0| < |y1 + y0|
    if (w * y0.conjugate()).real < 0:
        w = -w
    return w, q1


def continue_values(Q: ComplexPoly, zs, y0: complex):
    """y values continued through the ordered points zs, seeded with
    y0 = y(zs[0]).  Consecutive points should be connectable by straight
    steps staying clear of roots."""
    zs = np.asarray(zs, dtype=complex)
    n = len(zs)
    # vectorized fast path: if every consecutive Q-ratio stays in the right
    # half-plane with tame magnitude, the continuity selector reduces to
    # cumulative sign flips of the principal square root
    qs = Q(zs)
    if n > 1 and np.all(qs != 0):
        r = qs[1:] / qs[:-1]
        if np.all(r.real > 0) and np.all(np.abs(np.log(np.abs(r))) < _RATIO_LOG_CAP):
            ws = np.sqrt(qs)
            flip = ((ws[1:] * np.conj(ws[:-1])).real < 0).astype(int)
            signs = np.concatenate([[1], (-1) ** np.cumsum(flip)])
            s0 = 1 if (ws[0] * np.conj(y0)).real > 0 else -1
            return s0 * signs * ws
    ys = np.empty(n, dtype=complex)
    ys[0] = y0
    q = complex(qs[0])
    y = complex(y0)
    for k in range(1, n):
        y, q = _cont_step(Q, zs[k - 1], q, y, zs[k])
        ys[k] = y
    return ys


@dataclass(frozen=True)
class SheetTrack:
    path: object
    samples: tuple        # of (z, y)
    final_sign: int       # final sheet sign relative to initial


def _path_vertices(path):
    verts = getattr(path, "vertices", None)
    if verts is None:
        verts = path
    return np.asarray(verts, dtype=complex)


def continue_sqrt(c: HyperellipticCurve, path, y0: complex,
                  margin: float = None) -> SheetTrack:
    """Track sqrt(Q) along a polyline path from seed y0 at the first vertex.

    The final sheet sign compares the continued value at the last vertex with
    the principal value continued from +sqrt(Q(start)); for closed paths this
    is the monodromy sign of the loop.
    """
    verts = _path_vertices(path)
    if margin is None:
        margin = c.clearance_margin()
    bad = _min_clearance(verts, c.rootset.flat())
    if bad < margin:
        raise PathThroughBranchPoint(f"clearance {bad:g} < margin {margin:g}")
    q0 = c.Q(verts[0])
    if abs(q0) == 0:
        raise PathThroughBranchPoint("seed point is a branch point")
    ys = continue_values(c.Q, verts, y0)
    ref = complex(np.sqrt(c.Q(verts[-1])))
    yf = ys[-1]
    sign_end = 1 if (yf * ref.conjugate()).real > 0 else -1
    ref0 = complex(np.sqrt(q0))
    sign_start = 1 if (complex(y0) * ref0.conjugate()).real > 0 else -1
    final = sign_end * sign_start
    samples = tuple(zip([complex(z) for z in verts], [complex(y) for y in ys]))
    return SheetTrack(path=path, samples=samples, final_sign=int(final))


def _min_clearance(verts, root_pts, skip_endpoints=False):
    """Minimum distance from any root to the polyline."""
    best = np.inf
    for r in root_pts:
        for k in range(len(verts) - 1):
            a, b = verts[k], verts[k + 1]
            d = _dist_point_segment(r, a, b)
            if d < best:
                best = d
    return best


def _dist_point_segment(p, a, b):
    ab = b - a
    denom = abs(ab) ** 2
    if denom == 0:
        return abs(p - a)
    t = ((p - a) * ab.conjugate()).real / denom
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * ab))


# ---------------------------------------------------------------------------
# forms

@dataclass(frozen=True)
class MeromorphicForm:
    """The anti-invariant form numerator(z) dz / (2y)."""

    numerator: ComplexPoly

    def eval(self, z, y):
        return self.numerator(z) / (2.0 * y)


class Theta:
    """The tautological form y dz."""

    def eval(self, z, y):
        return y


THETA = Theta()


def pullback_quadratic(f: ComplexPoly) -> MeromorphicForm:
    """Quadratic differential f(z) dz^2 pulled back to f(z) dz/(2y)."""
    return MeromorphicForm(numerator=f)


def vanishing_order(c: HyperellipticCurve, form, cluster: Cluster,
                    radii=None, direction: float = 0.3):
    """Order of the form at a branch cluster in the local parameter t.

    Odd cluster of a simple root r: z = r + t^2, the local coordinate on the
    cover; even cluster (double root): z = r + t per sheet.  The order is
    the slope of log|form dz/dt| against log|t| on a geometric radii ladder,
    rounded to the nearest integer.

    Returns (order, r_squared).
    """
    if radii is None:
        radii = 10.0 ** (-(2 + 0.25 * np.arange(13)))   # 1e-2 .. 1e-5
    r0 = cluster.center
    vals = []
    for t_abs in radii:
        t = t_abs * np.exp(1j * direction)
        if cluster.parity == "odd":
            z = r0 + t * t
            jac = 2.0 * t
        else:
            z = r0 + t
            jac = 1.0
        y = np.sqrt(c.Q(z))   # any sheet: only |.| is used
        if isinstance(form, Theta):
            v = abs(y * jac)
        else:
            v = abs(form.eval(z, y) * jac)
        vals.append(v)
    x = np.log(np.asarray(radii))
    yv = np.log(np.asarray(vals))
    slope, intercept = np.polyfit(x, yv, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((yv - pred) ** 2))
    ss_tot = float(np.sum((yv - yv.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    # a flat ladder (order zero) has no variance for R^2 to explain; judge
    # it by the absolute log-scale scatter instead
    if ss_res / len(radii) < 1e-4:
        r2 = 1.0
    if r2 < 0.999:
        raise FitUnstable(f"vanishing-order fit R^2 = {r2:.6f}")
    return int(round(slope)), r2
