"""Cycles on the planar double cover: construction and transport.

Paths are polylines in the z-plane.  Cycles are integer-weighted formal sums
of sheet-labeled path lifts:

 - a-cycles: closed capsule loops around root pairs, lifted to one sheet
   (a loop around an even number of odd branch points closes on the cover);
 - b-cycles: both-sheet differences of paths connecting consecutive pairs,
   which close up through the branch points at their ends.

Intersection numbers are signed planar crossing counts restricted to equal
sheet labels.  A raw chain basis is reduced to the symplectic normal form
<a_i, b_j> = delta_ij by integer column operations, mirroring the correction
of b-cycles by multiples of vanishing loops.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    ClusterCrowded,
    NoRoute,
    PathThroughBranchPoint,
    PlanInconsistent,
    StepTooLarge,
)
from .surface import BranchData, HyperellipticCurve, continue_values, _dist_point_segment

_ARC_POINTS = 25          # odd: no arc vertex on the symmetry axis
_DETOUR_POINTS = 12
_DETOUR_BUDGET = 8
_MAX_PAIR_ROTATION = np.pi / 48


@dataclass(frozen=True)
class Path:
    """Oriented polyline; endpoints may sit exactly at branch points."""

    vertices: tuple
    root_start: bool = False
    root_end: bool = False

    def __post_init__(self):
        object.__setattr__(self, "vertices",
                           tuple(complex(v) for v in self.vertices))

    @property
    def closed(self) -> bool:
        return abs(self.vertices[0] - self.vertices[-1]) == 0

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]

    def reversed(self) -> "Path":
        return Path(vertices=tuple(reversed(self.vertices)),
                    root_start=self.root_end, root_end=self.root_start)

    def arclength_fractions(self):
        v = np.asarray(self.vertices)
        seg = np.abs(np.diff(v))
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        total = cum[-1]
        return cum / total if total > 0 else cum


@dataclass(frozen=True)
class Component:
    """One sheet-labeled lift of a path, with an integer-like weight.

    y_anchor seeds the sheet: y(vertices[anchor_idx]) = y_anchor.  The
    weight multiplies both periods and crossing contributions; orientation
    reversal is weight negation on the same underlying path.
    """

    path: Path
    y_anchor: complex
    anchor_idx: int
    weight: float
    kind: str             # "loop" | "lift"
    root_meta: tuple      # construction metadata (informational)
    width_factor: float = 0.5   # loops: capsule width as a fraction of the
                                # distance to the nearest foreign root


@dataclass(frozen=True)
class Cycle:
    components: tuple     # of Component
    closed: bool = True

    def scaled(self, n) -> "Cycle":
        return Cycle(components=tuple(
            replace(c, weight=c.weight * n) for c in self.components),
            closed=self.closed)

    @staticmethod
    def combine(terms) -> "Cycle":
        comps = []
        for cyc, n in terms:
            if n == 0:
                continue
            comps.extend(cyc.scaled(n).components)
        return Cycle(components=tuple(comps))


@dataclass(frozen=True)
class CycleBasis:
    a_cycles: tuple
    b_cycles: tuple
    intersection: tuple   # 2g x 2g integer matrix rows (a then b)
    degeneracy_tags: tuple  # indices of a-cycles that are vanishing loops
    pair_loops: tuple     # per plan pair: single-pair loop Cycle or None
    plan: "PairingPlan"


@dataclass(frozen=True)
class PairingPlan:
    """Chain plan: clusters grouped into pairs; consecutive pairs are joined
    by b-paths.  The last pair closes the chain and carries no a-loop."""

    pairs: tuple              # tuple of tuples of cluster indices
    collision_tags: tuple     # indices into pairs that degenerate
    partial_sums: bool = False
    b_weight: float = 1.0


# ---------------------------------------------------------------------------
# geometry helpers

def _own_points(b: BranchData, pair):
    pts = []
    for ci in pair:
        pts.extend(b.clusters[ci].members)
    return pts


def _foreign_points(b: BranchData, pair):
    pts = []
    for ci, cl in enumerate(b.clusters):
        if ci not in pair:
            pts.extend(cl.members)
    return pts


def _capsule_vertices(p1, p2, width):
    """Counterclockwise capsule boundary around segment [p1, p2]."""
    if abs(p2 - p1) == 0:
        # start angle offset keeps vertices off the axes of symmetric configs
        th = 0.2337 + np.linspace(0.0, 2.0 * np.pi, 2 * _ARC_POINTS + 1)
        v = list(p1 + width * np.exp(1j * th))
        v[-1] = v[0]
        return tuple(v)
    u = (p2 - p1) / abs(p2 - p1)
    n = 1j * u
    phi = np.angle(n)
    th1 = phi - np.linspace(0.0, np.pi, _ARC_POINTS + 1)   # arc around p2
    th2 = (phi + np.pi) - np.linspace(0.0, np.pi, _ARC_POINTS + 1)  # around p1
    verts = [p1 + width * n, p2 + width * n]
    verts.extend(p2 + width * np.exp(1j * th1[1:]))
    verts.append(p1 - width * n)
    verts.extend(p1 + width * np.exp(1j * th2[1:]))
    # close exactly and force counterclockwise orientation
    verts[-1] = verts[0]
    if _signed_area(verts) < 0:
        verts = list(reversed(verts))
    return tuple(verts)


def _signed_area(verts):
    s = 0.0
    for k in range(len(verts) - 1):
        a, b = verts[k], verts[k + 1]
        s += a.real * b.imag - a.imag * b.real
    return 0.5 * s


def _point_in_polygon(p, verts):
    """Ray-crossing parity test; verts closed polyline."""
    inside = False
    for k in range(len(verts) - 1):
        a, b = verts[k], verts[k + 1]
        if (a.imag > p.imag) != (b.imag > p.imag):
            x = a.real + (p.imag - a.imag) * (b.real - a.real) / (b.imag - a.imag)
            if x > p.real:
                inside = not inside
    return inside


def _min_dist_to_polyline(p, verts):
    best = np.inf
    for k in range(len(verts) - 1):
        d = _dist_point_segment(p, verts[k], verts[k + 1])
        if d < best:
            best = d
    return best


def _seg_cross(a0, a1, b0, b1, tol=1e-12):
    """Proper crossing of open segments; returns (s, t, sign) or None."""
    d1 = a1 - a0
    d2 = b1 - b0
    denom = d1.real * d2.imag - d1.imag * d2.real
    scale = abs(d1) * abs(d2)
    if scale == 0 or abs(denom) < tol * scale:
        return None
    w = b0 - a0
    s = (w.real * d2.imag - w.imag * d2.real) / denom
    t = (w.real * d1.imag - w.imag * d1.real) / denom
    eps = 1e-9
    if not (eps < s < 1 - eps and eps < t < 1 - eps):
        return None
    return s, t, 1 if denom > 0 else -1


# ---------------------------------------------------------------------------
# loop and path construction

def vanishing_loop(b: BranchData, cluster_pair, require_separation=True,
                   width_factor: float = 0.5) -> Cycle:
    """Capsule loop around a collision pair (or a single even cluster),
    lifted to the sheet of the principal square root at its first vertex.

    The loop is a constant-width neighborhood of the segment joining the
    pair; the width is half the distance to the nearest foreign root, so
    admissible-radius changes stay homotopic.
    """
    pair = tuple(cluster_pair) if hasattr(cluster_pair, "__len__") else (cluster_pair,)
    own = _own_points(b, pair)
    foreign = _foreign_points(b, pair)
    centers = [b.clusters[ci].center for ci in pair]
    p1 = centers[0]
    p2 = centers[-1] if len(centers) > 1 else centers[0]
    diam = max(abs(x - y) for x in own for y in own) if len(own) > 1 else 0.0
    sep = min(abs(x - s) for x in own for s in foreign) if foreign else np.inf
    if require_separation and foreign and sep < 3.0 * diam:
        raise ClusterCrowded(
            f"separation {sep:g} < 3 x diameter {diam:g}")
    width = width_factor * min(_dist_point_segment(s, p1, p2) for s in foreign)
    verts = _capsule_vertices(p1, p2, width)
    return Cycle(components=(Component(
        path=Path(vertices=verts), y_anchor=0j, anchor_idx=0, weight=1.0,
        kind="loop", root_meta=pair, width_factor=width_factor),),
        closed=True)


def _representative(b: BranchData, pair, toward_pts):
    """Root of the pair used as a path endpoint: nearest to the target pair,
    ties broken by smaller principal argument about the pair centroid."""
    own = _own_points(b, pair)
    centroid = sum(own) / len(own)
    def key(r):
        d = min(abs(r - s) for s in toward_pts)
        rel = r - centroid
        ang = abs(np.angle(rel)) if rel != 0 else 0.0
        return (round(d, 12), round(ang, 12), r.real, r.imag)
    return min(own, key=key)


def connecting_path(b: BranchData, from_pair, to_pair, obstacles,
                    margin: float) -> Path:
    """Polyline from a root of from_pair to a root of to_pair, detouring
    around obstacle roots; always passes with the detour bulging to the left
    of the travel direction."""
    own_to = _own_points(b, tuple(to_pair))
    own_from = _own_points(b, tuple(from_pair))
    r_from = _representative(b, tuple(from_pair), own_to)
    r_to = _representative(b, tuple(to_pair), [r_from])
    # interior vertex off the symmetric midpoint and bent off the chord so
    # that boundary crossings of symmetric configurations are generic
    # (never exactly at a capsule vertex or along a capsule seam)
    mid = r_from + (0.4375 + 0.09j) * (r_to - r_from)
    verts = [r_from, mid, r_to]
    obs = [o for o in obstacles if abs(o - r_from) > 0 and abs(o - r_to) > 0]
    verts = _ensure_clearance(verts, obs, margin)
    return Path(vertices=tuple(verts), root_start=True, root_end=True)


def _effective_margin(o, margin, endpoints):
    d_end = min(abs(o - e) for e in endpoints)
    return min(margin, 0.3 * d_end)


def _ensure_clearance(verts, obstacles, margin):
    """Insert left-side circular detours until every obstacle is at least
    its effective margin away from the polyline."""
    verts = [complex(v) for v in verts]
    for _ in range(_DETOUR_BUDGET):
        dirty = False
        for o in obstacles:
            m_eff = _effective_margin(o, margin, (verts[0], verts[-1]))
            if m_eff <= 0:
                continue
            if _min_dist_to_polyline(o, verts) >= 0.9 * m_eff:
                continue
            verts = _insert_detour(verts, o, 1.5 * m_eff)
            dirty = True
        if not dirty:
            return verts
    raise NoRoute("detour budget exhausted")


def _insert_detour(verts, o, radius):
    """Replace the portion of the polyline inside |z - o| = radius by an arc
    on the left of the travel direction."""
    # find first entry and last exit crossings with the circle
    events = []
    for k in range(len(verts) - 1):
        a, bseg = verts[k], verts[k + 1]
        for t in _segment_circle_params(a, bseg, o, radius):
            events.append((k, t, a + t * (bseg - a)))
    if len(events) < 2:
        # path starts or ends inside the circle; push the nearest vertex out
        return _push_out(verts, o, radius)
    events.sort(key=lambda e: (e[0], e[1]))
    k_in, _, p_in = events[0]
    k_out, _, p_out = events[-1]
    d = verts[k_in + 1] - verts[k_in]
    d = d / abs(d)
    a_in = np.angle(p_in - o)
    a_out = np.angle(p_out - o)
    # two candidate arcs; pick the one bulging left of the travel direction
    span_ccw = (a_out - a_in) % (2 * np.pi)
    cand = []
    for sgn, span in ((1.0, span_ccw), (-1.0, 2 * np.pi - span_ccw)):
        th = a_in + sgn * span * np.linspace(0.0, 1.0, _DETOUR_POINTS + 1)
        arc = o + radius * np.exp(1j * th)
        cand.append(arc)
    def left_score(arc):
        midp = arc[len(arc) // 2]
        return (d.conjugate() * (midp - o)).imag
    arc = max(cand, key=left_score)
    return verts[:k_in + 1] + [p_in] + list(arc[1:-1]) + [p_out] + verts[k_out + 1:]


def _segment_circle_params(a, b, o, r):
    d = b - a
    f = a - o
    A = abs(d) ** 2
    if A == 0:
        return []
    B = 2 * (f.real * d.real + f.imag * d.imag)
    C = abs(f) ** 2 - r * r
    disc = B * B - 4 * A * C
    if disc <= 0:
        return []
    sq = np.sqrt(disc)
    out = []
    for t in ((-B - sq) / (2 * A), (-B + sq) / (2 * A)):
        if 1e-9 < t < 1 - 1e-9:
            out.append(t)
    return out


def _push_out(verts, o, radius):
    out = []
    for v in verts:
        if abs(v - o) < radius and abs(v - verts[0]) > 0 and abs(v - verts[-1]) > 0:
            u = (v - o)
            u = u / abs(u) if abs(u) > 0 else 1.0
            out.append(o + 1.05 * radius * u)
        else:
            out.append(v)
    return out


# ---------------------------------------------------------------------------
# sheet values along components

def _anchor_seed(curve: HyperellipticCurve, comp: Component):
    z0 = comp.path.vertices[comp.anchor_idx]
    w = complex(np.sqrt(curve.Q(z0)))
    y = comp.y_anchor
    if y == 0:
        return w
    return w if (w * y.conjugate()).real > 0 else -w


def component_vertex_sheets(curve: HyperellipticCurve, comp: Component):
    """y at every non-root vertex of the component's path, continued outward
    from the anchor.  Root endpoints get y = 0."""
    verts = list(comp.path.vertices)
    n = len(verts)
    k0 = comp.anchor_idx
    y0 = _anchor_seed(curve, comp)
    ys = [None] * n
    lo = 1 if comp.path.root_start else 0
    hi = n - 2 if comp.path.root_end else n - 1
    fwd_idx = list(range(k0, hi + 1))
    bwd_idx = list(range(k0, lo - 1, -1))
    if len(fwd_idx) > 1:
        vals = continue_values(curve.Q, [verts[i] for i in fwd_idx], y0)
        for i, v in zip(fwd_idx, vals):
            ys[i] = complex(v)
    else:
        ys[k0] = y0
    if len(bwd_idx) > 1:
        vals = continue_values(curve.Q, [verts[i] for i in bwd_idx], y0)
        for i, v in zip(bwd_idx, vals):
            ys[i] = complex(v)
    else:
        ys[k0] = y0
    if comp.path.root_start:
        ys[0] = 0j
    if comp.path.root_end:
        ys[-1] = 0j
    return ys


def _sheet_at(curve, comp, vertex_sheets, seg_idx, point):
    """y of the component at an interior point of segment seg_idx."""
    v = comp.path.vertices
    base_idx = seg_idx if vertex_sheets[seg_idx] is not None else seg_idx + 1
    yb = vertex_sheets[base_idx]
    if yb is None or yb == 0:
        base_idx = seg_idx + 1
        yb = vertex_sheets[base_idx]
    ys = continue_values(curve.Q, [v[base_idx], point], yb)
    return complex(ys[-1])


# ---------------------------------------------------------------------------
# intersections

def intersection_number(curve: HyperellipticCurve, c1: Cycle, c2: Cycle) -> float:
    """Signed planar crossing count restricted to equal sheet labels.

    Returns the weighted total; integer for unit-weight conventions."""
    total = 0.0
    sheets1 = [component_vertex_sheets(curve, cp) for cp in c1.components]
    sheets2 = [component_vertex_sheets(curve, cp) for cp in c2.components]
    for cp1, sh1 in zip(c1.components, sheets1):
        v1 = cp1.path.vertices
        for cp2, sh2 in zip(c2.components, sheets2):
            v2 = cp2.path.vertices
            for i in range(len(v1) - 1):
                for j in range(len(v2) - 1):
                    hit = _seg_cross(v1[i], v1[i + 1], v2[j], v2[j + 1])
                    if hit is None:
                        continue
                    s, t, sgn = hit
                    p = v1[i] + s * (v1[i + 1] - v1[i])
                    y1 = _sheet_at(curve, cp1, sh1, i, p)
                    y2 = _sheet_at(curve, cp2, sh2, j, p)
                    if abs(y1 - y2) < abs(y1 + y2):
                        total += cp1.weight * cp2.weight * sgn
    return total


def _as_int(x, what="crossing count"):
    n = round(x)
    if abs(x - n) > 1e-9:
        raise PlanInconsistent(f"non-integer {what}: {x}")
    return int(n)


def intersection_matrix(curve, a_cycles, b_cycles):
    cycles = list(a_cycles) + list(b_cycles)
    n = len(cycles)
    M = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            v = intersection_number(curve, cycles[i], cycles[j])
            M[i, j] = v
            M[j, i] = -v
    return M


def _normal_form(g):
    J = np.zeros((2 * g, 2 * g), dtype=int)
    J[:g, g:] = np.eye(g, dtype=int)
    J[g:, :g] = -np.eye(g, dtype=int)
    return J


# ---------------------------------------------------------------------------
# basis construction

def _double_lift(curve, path: Path, weight: float) -> Cycle:
    """Both-sheet difference of the lifted path; closes through the branch
    points at its ends."""
    k0 = len(path.vertices) // 2
    z0 = path.vertices[k0]
    y0 = complex(np.sqrt(curve.Q(z0)))
    meta = ()
    plus = Component(path=path, y_anchor=y0, anchor_idx=k0, weight=weight,
                     kind="lift", root_meta=meta)
    minus = Component(path=path, y_anchor=-y0, anchor_idx=k0, weight=-weight,
                      kind="lift", root_meta=meta)
    return Cycle(components=(plus, minus), closed=True)


def build_cycle_basis(curve: HyperellipticCurve, plan: PairingPlan) -> CycleBasis:
    """Chain construction: capsule a-loops around the first m-1 pairs
    (partial-summed if requested), b-cycles joining consecutive pairs, then
    integer reduction to the symplectic normal form with vanishing a-cycles
    ordered last."""
    b = curve.branch
    m = len(plan.pairs)
    g = curve.genus
    if m < 2 or m - 1 != g:
        raise PlanInconsistent(f"plan has {m} pairs for genus {g}")
    covered = sorted(ci for pair in plan.pairs for ci in pair)
    if covered != list(range(len(b.clusters))):
        raise PlanInconsistent("plan does not partition the clusters")

    margin = curve.clearance_margin()
    raw_loops = []
    for k in range(m - 1):
        require = k in plan.collision_tags
        # widths alternate so that adjacent capsules, each sized from the
        # same inter-pair gap, are never mutually tangent
        wf = 0.5 if k % 2 == 0 else 0.42
        raw_loops.append(vanishing_loop(b, plan.pairs[k],
                                        require_separation=require,
                                        width_factor=wf))
    all_roots = curve.rootset.flat()
    b_raw = []
    for k in range(m - 1):
        pth = connecting_path(b, plan.pairs[k], plan.pairs[k + 1],
                              obstacles=all_roots, margin=margin)
        b_raw.append(_double_lift(curve, pth, plan.b_weight))

    if plan.partial_sums:
        # Sign the summands so every b-lift pairs with exactly one partial
        # sum: b_raw[j] crosses loops j and j+1 only, so requiring the two
        # crossings to cancel inside each longer sum leaves <a_i, b_j>
        # diagonal and keeps the reduced b-cycles single connecting lifts.
        sigma = [1] * (m - 1)
        for j in range(m - 2):
            cjj = intersection_number(curve, raw_loops[j], b_raw[j])
            cnj = intersection_number(curve, raw_loops[j + 1], b_raw[j])
            if abs(abs(cjj) - plan.b_weight) < 1e-9 and \
               abs(abs(cnj) - plan.b_weight) < 1e-9:
                sigma[j + 1] = -sigma[j] * int(round(cjj / cnj))
        a_raw = [Cycle.combine([(raw_loops[j], sigma[j]) for j in range(k + 1)])
                 for k in range(m - 1)]
    else:
        a_raw = list(raw_loops)

    # reduce <a_i, b_j> to the identity by integer combinations of b's
    M = np.zeros((g, g), dtype=float)
    for i in range(g):
        for j in range(g):
            M[i, j] = intersection_number(curve, a_raw[i], b_raw[j])
    M = M / plan.b_weight
    Mi = np.rint(M).astype(int)
    if np.max(np.abs(Mi - M)) > 1e-9 or abs(round(np.linalg.det(Mi))) != 1:
        raise PlanInconsistent(f"raw pairing matrix not unimodular:\n{Mi}")
    U = np.rint(np.linalg.inv(Mi)).astype(int)
    b_hat = [Cycle.combine([(b_raw[k], int(U[k, j])) for k in range(g)])
             for j in range(g)]

    # kill residual <b_i, b_j> with a-corrections
    S = np.zeros((g, g), dtype=int)
    for i in range(g):
        for j in range(i + 1, g):
            S[i, j] = _as_int(intersection_number(curve, b_hat[i], b_hat[j])
                              / plan.b_weight ** 2, "b-b crossing")
            S[j, i] = -S[i, j]
    if np.any(S):
        N = np.zeros((g, g), dtype=int)
        for i in range(g):
            for j in range(i + 1, g):
                N[i, j] = -S[i, j]
        b_hat = [Cycle.combine([(b_hat[j], 1)] +
                               [(a_raw[k], -int(N[k, j])) for k in range(g)])
                 for j in range(g)]

    # vanishing a-cycles last
    def is_vanishing(k):
        if plan.partial_sums:
            return any(j in plan.collision_tags for j in range(k + 1))
        return k in plan.collision_tags
    order = sorted(range(g), key=lambda k: (is_vanishing(k), k))
    a_cycles = [a_raw[k] for k in order]
    b_cycles = [b_hat[k] for k in order]
    tags = tuple(i for i, k in enumerate(order) if is_vanishing(k))

    M_full = np.rint(intersection_matrix(curve, a_cycles, b_cycles) /
                     plan.b_weight).astype(int)
    if plan.b_weight == 1.0 and not np.array_equal(M_full, _normal_form(g)):
        raise PlanInconsistent(f"reduction failed:\n{M_full}")

    pair_loops = []
    for k in range(m):
        if k in plan.collision_tags and k < m - 1:
            pair_loops.append(raw_loops[k])
        elif k in plan.collision_tags:
            wf = 0.5 if k % 2 == 0 else 0.42
            pair_loops.append(vanishing_loop(b, plan.pairs[k], width_factor=wf))
        else:
            pair_loops.append(None)

    return CycleBasis(a_cycles=tuple(a_cycles), b_cycles=tuple(b_cycles),
                      intersection=tuple(map(tuple, M_full.tolist())),
                      degeneracy_tags=tags, pair_loops=tuple(pair_loops),
                      plan=plan)


# ---------------------------------------------------------------------------
# transport

def _transport_component(comp: Component, old: HyperellipticCurve,
                         new: HyperellipticCurve, matching, margin):
    old_flat = old.rootset.flat()
    new_flat = new.rootset.flat()
    if comp.kind == "loop":
        own_idx = [i for i, r in enumerate(old_flat)
                   if _point_in_polygon(r, comp.path.vertices)]
        own_new = [new_flat[matching[i]] for i in own_idx]
        verts = _rebuild_loop(own_new, [new_flat[matching[i]]
                                        for i in range(len(old_flat))
                                        if i not in own_idx],
                              comp.width_factor)
        return _reanchor_loop(comp, old, new, verts)
    else:
        i0 = _nearest_root_index(old_flat, comp.path.start)
        i1 = _nearest_root_index(old_flat, comp.path.end)
        d0 = new_flat[matching[i0]] - old_flat[i0]
        d1 = new_flat[matching[i1]] - old_flat[i1]
        fr = comp.path.arclength_fractions()
        verts = [v + (1 - f) * d0 + f * d1
                 for v, f in zip(comp.path.vertices, fr)]
        # snap root endpoints exactly to their matched roots so they are
        # never mistaken for obstacles by a rounding-level offset
        if comp.path.root_start:
            verts[0] = new_flat[matching[i0]]
        if comp.path.root_end:
            verts[-1] = new_flat[matching[i1]]
        tol = 1e-9 * max(abs(v) for v in new_flat + [1.0])
        obstacles = [r for r in new_flat
                     if abs(r - verts[0]) > tol and abs(r - verts[-1]) > tol]
        verts = _ensure_clearance(verts, obstacles, margin)
    new_path = Path(vertices=tuple(verts), root_start=comp.path.root_start,
                    root_end=comp.path.root_end)
    # transport the anchor continuously: nearest square root at the moved
    # anchor point
    old_anchor_z = comp.path.vertices[comp.anchor_idx]
    k_new = comp.anchor_idx
    if comp.kind == "lift":
        k_new = min(range(len(new_path.vertices)),
                    key=lambda k: abs(new_path.vertices[k] - old_anchor_z)
                    if 0 < k < len(new_path.vertices) - 1 else np.inf)
    y_old = comp.y_anchor if comp.y_anchor != 0 else complex(
        np.sqrt(old.Q(old_anchor_z)))
    w = complex(np.sqrt(new.Q(new_path.vertices[k_new])))
    y_new = w if (w * y_old.conjugate()).real > 0 else -w
    return replace(comp, path=new_path, anchor_idx=k_new, y_anchor=y_new)


def _reanchor_loop(comp: Component, old, new, verts):
    """Transport a loop anchor: sign-match at the new vertex nearest the old
    anchor point, then continue along the new polyline back to vertex 0
    (vertex ordering of a rebuilt capsule can jump arbitrarily)."""
    old_anchor_z = comp.path.vertices[comp.anchor_idx]
    y_old = comp.y_anchor if comp.y_anchor != 0 else complex(
        np.sqrt(old.Q(old_anchor_z)))
    k_near = min(range(len(verts) - 1),
                 key=lambda k: abs(verts[k] - old_anchor_z))
    w = complex(np.sqrt(new.Q(verts[k_near])))
    y_near = w if (w * y_old.conjugate()).real > 0 else -w
    if k_near == 0:
        y0 = y_near
    else:
        chain = [verts[k] for k in range(k_near, -1, -1)]
        y0 = complex(continue_values(new.Q, chain, y_near)[-1])
    new_path = Path(vertices=tuple(verts))
    return replace(comp, path=new_path, anchor_idx=0, y_anchor=y0)


def _nearest_root_index(flat, z):
    return min(range(len(flat)), key=lambda i: abs(flat[i] - z))


def _rebuild_loop(own_pts, foreign_pts, width_factor):
    if len(own_pts) > 1:
        p1 = min(own_pts, key=lambda r: (r.real, r.imag))
        p2 = max(own_pts, key=lambda r: (r.real, r.imag))
    else:
        p1 = p2 = own_pts[0]
    width = width_factor * min(_dist_point_segment(s, p1, p2) for s in foreign_pts)
    return _capsule_vertices(p1, p2, width)


def deform_basis(basis: CycleBasis, old: HyperellipticCurve,
                 new: HyperellipticCurve, matching) -> CycleBasis:
    """Transport the basis along one parameter step.

    Loops are rebuilt from the moved clusters; connecting-path endpoints go
    to the matched roots with interior vertices transported affinely by
    arclength fraction; anchors follow by nearest square root.  The
    intersection matrix is re-verified.
    """
    old_flat = old.rootset.flat()
    new_flat = new.rootset.flat()
    disp = max(abs(new_flat[matching[i]] - old_flat[i])
               for i in range(len(old_flat)))
    seps = [abs(a - b) for i, a in enumerate(old_flat)
            for b in old_flat[i + 1:] if abs(a - b) > 0]
    if seps and disp > 0.25 * min(seps):
        raise StepTooLarge(f"displacement {disp:g} > 1/4 min separation")
    # A root pair spinning too fast can slip a winding past the detour
    # bookkeeping without changing any intersection number (the slipped class
    # is the pair's own vanishing cycle, which pairs to zero with everything
    # but its dual).  Bound the relative rotation per step instead.
    for i in range(len(old_flat)):
        for j in range(i + 1, len(old_flat)):
            d_old = old_flat[i] - old_flat[j]
            d_new = new_flat[matching[i]] - new_flat[matching[j]]
            if abs(d_old) > 0 and abs(d_new) > 0:
                ang = abs(np.angle(d_new / d_old))
                if ang > _MAX_PAIR_ROTATION:
                    raise StepTooLarge(
                        f"pair ({i},{j}) rotates {ang:g} rad in one step")
    margin = new.clearance_margin()

    def move(cycle):
        return Cycle(components=tuple(
            _transport_component(cp, old, new, matching, margin)
            for cp in cycle.components), closed=cycle.closed)

    a_new = tuple(move(c) for c in basis.a_cycles)
    b_new = tuple(move(c) for c in basis.b_cycles)
    loops_new = tuple(move(c) if c is not None else None
                      for c in basis.pair_loops)
    M = intersection_matrix(new, a_new, b_new)
    if basis.plan.b_weight == 1.0 and not np.array_equal(
            M, np.asarray(basis.intersection)):
        raise StepTooLarge("intersection matrix changed under transport")
    return CycleBasis(a_cycles=a_new, b_cycles=b_new,
                      intersection=tuple(map(tuple, M.tolist())),
                      degeneracy_tags=basis.degeneracy_tags,
                      pair_loops=loops_new, plan=basis.plan)
