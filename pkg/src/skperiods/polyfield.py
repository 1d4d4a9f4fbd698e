"""Complex polynomial arithmetic and root localization.

Polynomials are stored with ascending coefficients.  Root finding uses the
Aberth-Ehrlich simultaneous iteration followed by a Newton polish; close
roots are merged into multiple roots by cluster radius.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousMatching, NonConvergence


@dataclass(frozen=True)
class ComplexPoly:
    """Polynomial sum_k coeffs[k] * z**k."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(complex(x) for x in self.coeffs)
        # normalize: strip trailing zero coefficients, keep at least one
        n = len(c)
        while n > 1 and c[n - 1] == 0:
            n -= 1
        object.__setattr__(self, "coeffs", c[:n])

    @property
    def degree(self) -> int:
        if len(self.coeffs) == 1 and self.coeffs[0] == 0:
            return -1
        return len(self.coeffs) - 1

    def __call__(self, z):
        return eval_poly(self, z)

    def derivative(self) -> "ComplexPoly":
        c = self.coeffs
        if len(c) == 1:
            return ComplexPoly((0j,))
        return ComplexPoly(tuple(k * c[k] for k in range(1, len(c))))

    def __add__(self, other: "ComplexPoly") -> "ComplexPoly":
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        out = [0j] * n
        for k, x in enumerate(a):
            out[k] += x
        for k, x in enumerate(b):
            out[k] += x
        return ComplexPoly(tuple(out))

    def __mul__(self, other):
        if isinstance(other, ComplexPoly):
            a, b = self.coeffs, other.coeffs
            out = [0j] * (len(a) + len(b) - 1)
            for i, x in enumerate(a):
                for j, y in enumerate(b):
                    out[i + j] += x * y
            return ComplexPoly(tuple(out))
        return ComplexPoly(tuple(complex(other) * x for x in self.coeffs))

    __rmul__ = __mul__

    @staticmethod
    def from_roots(roots, leading=1.0) -> "ComplexPoly":
        p = ComplexPoly((complex(leading),))
        for r in roots:
            p = p * ComplexPoly((-complex(r), 1.0))
        return p


def eval_poly(p: ComplexPoly, z):
    """Horner evaluation; accepts scalars or numpy arrays."""
    if isinstance(z, (complex, float, int)):
        acc = 0j
        zc = complex(z)
        for c in reversed(p.coeffs):
            acc = acc * zc + c
        return acc
    z = np.asarray(z, dtype=complex)
    acc = np.zeros_like(z)
    for c in reversed(p.coeffs):
        acc = acc * z + c
    if acc.ndim == 0:
        return complex(acc)
    return acc


@dataclass(frozen=True)
class RootSet:
    """Roots with multiplicity tags and the refinement residual."""

    roots: tuple          # complex root values, one entry per distinct root
    mults: tuple          # multiplicities, same length
    residual: float

    def __post_init__(self):
        object.__setattr__(self, "roots", tuple(complex(r) for r in self.roots))
        object.__setattr__(self, "mults", tuple(int(m) for m in self.mults))

    @property
    def total(self) -> int:
        return sum(self.mults)

    def flat(self):
        """Roots repeated with multiplicity."""
        out = []
        for r, m in zip(self.roots, self.mults):
            out.extend([r] * m)
        return out


def _aberth(coeffs, maxiter=200):
    """Aberth-Ehrlich simultaneous iteration on the monic normalization."""
    c = np.asarray(coeffs, dtype=complex)
    c = c / c[-1]
    n = len(c) - 1
    # initial guesses on a circle scaled by the Cauchy bound, slightly
    # irrational angle offset to break symmetric stalemates
    radius = 1.0 + max(abs(x) for x in c[:-1])
    k = np.arange(n)
    z = radius * np.exp(2j * np.pi * (k + 0.357) / n) * (0.9 + 0.1 * k / max(n, 1))
    dc = c[1:] * np.arange(1, n + 1)
    for _ in range(maxiter):
        pz = np.polyval(c[::-1], z)
        dpz = np.polyval(dc[::-1], z)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = np.where(dpz != 0, pz / dpz, 0)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            s = np.sum(1.0 / diff, axis=1)
            denom = 1.0 - newton * s
            step = np.where(denom != 0, newton / denom, newton)
        z = z - step
        if np.max(np.abs(step)) < 1e-15 * max(1.0, np.max(np.abs(z))):
            break
    return z


def _newton_polish(coeffs, z, iters=5):
    c = np.asarray(coeffs, dtype=complex)
    dc = (c[1:] * np.arange(1, len(c)))
    for _ in range(iters):
        pz = np.polyval(c[::-1], z)
        dpz = np.polyval(dc[::-1], z)
        mask = np.abs(dpz) > 0
        step = np.zeros_like(z)
        step[mask] = pz[mask] / dpz[mask]
        # damp the step near multiple roots where Newton overshoots wildly
        big = np.abs(step) > 1.0
        step[big] /= np.abs(step[big])
        z = z - step
    return z


def roots(p: ComplexPoly, tol: float = 1e-11) -> RootSet:
    """Locate all roots of p with multiplicities.

    Aberth-Ehrlich iteration, Newton polish, then multiplicity assignment by
    cluster radius tol**(1/m): m raw roots within that radius of a common
    center merge into one root of multiplicity m.
    """
    if p.degree < 1:
        raise NonConvergence("degree must be >= 1")
    z = _aberth(p.coeffs)
    z = _newton_polish(p.coeffs, z)
    scale = max(1.0, float(np.max(np.abs(z))))

    # multiplicity merging: try m = highest plausible first so that a tight
    # m-cluster is recognized at radius tol**(1/m)
    pts = list(z)
    merged_roots, merged_mults = [], []
    while pts:
        z0 = pts[0]
        # collect candidates at the widest admissible radius
        best = None
        for m in range(len(pts), 0, -1):
            radius = (tol ** (1.0 / m)) * scale
            near = [w for w in pts if abs(w - z0) <= radius]
            if len(near) >= m:
                group = sorted(near, key=lambda w: abs(w - z0))[:m]
                best = group
                break
        group = best if best is not None else [z0]
        center = sum(group) / len(group)
        if len(group) > 1:
            # polish the multiple root on the (m-1)-th derivative-free mean
            center = complex(np.mean(group))
        merged_roots.append(center)
        merged_mults.append(len(group))
        for w in group:
            pts.remove(w)

    residual = max(abs(p(r)) for r in merged_roots)
    bound = tol * max(1.0, max(abs(c) for c in p.coeffs)) * scale ** p.degree
    simple_bad = any(m == 1 and abs(p(r)) > bound for r, m in zip(merged_roots, merged_mults))
    if simple_bad:
        raise NonConvergence(f"root residual {residual:g} above tolerance")
    idx = sorted(range(len(merged_roots)), key=lambda i: (merged_roots[i].real, merged_roots[i].imag))
    return RootSet(
        roots=tuple(merged_roots[i] for i in idx),
        mults=tuple(merged_mults[i] for i in idx),
        residual=float(residual),
    )


def match_roots(prev: RootSet, next_: RootSet, guard: float = 2.0):
    """Bijection prev -> next minimizing total displacement, greedily.

    Returns perm with next_.flat()[perm[i]] matched to prev.flat()[i].
    Raises AmbiguousMatching when the nearest and second-nearest candidate
    for some root differ in distance by less than the guard ratio while
    both remain unclaimed alternatives.
    """
    a = prev.flat()
    b = next_.flat()
    if len(a) != len(b):
        raise AmbiguousMatching("cardinality mismatch")
    n = len(a)
    taken = [False] * n
    perm = [0] * n
    # process in order of best-match confidence (smallest nearest distance)
    dists = np.abs(np.subtract.outer(np.array(a), np.array(b)))
    order = np.argsort(dists.min(axis=1))
    for i in order:
        row = [(dists[i, j], j) for j in range(n) if not taken[j]]
        row.sort()
        d0, j0 = row[0]
        if len(row) > 1:
            d1 = row[1][0]
            if d0 > 0 and d1 < guard * d0:
                raise AmbiguousMatching(
                    f"root {a[i]}: candidates at {d0:g} and {d1:g} within guard"
                )
        taken[j0] = True
        perm[i] = j0
    return perm
