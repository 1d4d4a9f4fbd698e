"""Parametrized curve families realizing the scan fixtures.

A family describes how the polynomial's roots move with the scan parameter:

 - pair-collision: tagged root pairs center +- eps*direction colliding as
   eps -> 0, plus fixed spectator roots;
 - multi-collision: the same with several tagged pairs driven jointly;
 - radial: the fixed curve Q0 scaled as l*Q0 over a grid of l;
 - raw: an explicit root list, no parameter.

Roots are constructed in a deterministic order (pair roots first, pair by
pair, then fixed roots), so consecutive ladder curves match by identity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .contour import PairingPlan
from .errors import ConfigError
from .periods import QuadConfig
from .surface import HyperellipticCurve

_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class FamilyConfig:
    name: str
    kind: str                      # pair-collision | multi-collision | radial | raw
    centers: tuple = ()            # collision pair centers
    directions: tuple = ()         # unit displacement per pair; default 1
    fixed_roots: tuple = ()
    eps0: float = 0.0
    ratio: float = 10.0 ** 0.25
    count: int = 0
    l_grid: tuple = ()
    plan_pairs: tuple = ()
    plan_tags: tuple = ()
    partial_sums: bool = False
    quad: QuadConfig = field(default_factory=QuadConfig)

    def __post_init__(self):
        if self.kind not in ("pair-collision", "multi-collision", "radial", "raw"):
            raise ConfigError(f"unknown family kind {self.kind!r}")
        if self.kind in ("pair-collision", "multi-collision"):
            if not self.centers or not self.plan_tags:
                raise ConfigError(f"{self.kind} family needs centers and collision tags")
            if self.eps0 <= 0 or self.count < 1:
                raise ConfigError("collision family needs eps0 > 0 and count >= 1")
        if self.kind == "radial" and not self.l_grid:
            raise ConfigError("radial family needs an l grid")
        if not self.directions:
            object.__setattr__(self, "directions",
                               tuple(1.0 + 0j for _ in self.centers))
        n_roots = 2 * len(self.centers) + len(self.fixed_roots)
        if n_roots % 2 != 0:
            raise ConfigError("family roots must have even total degree")

    def roots_at(self, eps):
        """Root list at parameter eps (scalar, or one value per pair)."""
        if not hasattr(eps, "__len__"):
            eps = [eps] * len(self.centers)
        if len(eps) != len(self.centers):
            raise ConfigError("eps vector length != number of pairs")
        out = []
        for c, d, e in zip(self.centers, self.directions, eps):
            out.extend([complex(c) - e * complex(d), complex(c) + e * complex(d)])
        out.extend(complex(r) for r in self.fixed_roots)
        return out

    def curve_at(self, eps) -> HyperellipticCurve:
        if self.kind == "raw" or self.kind == "radial":
            return HyperellipticCurve.from_roots(
                [complex(r) for r in self.fixed_roots])
        return HyperellipticCurve.from_roots(self.roots_at(eps))

    def ladder(self):
        return [self.eps0 / self.ratio ** k for k in range(self.count)]

    def plan(self) -> PairingPlan:
        return PairingPlan(pairs=tuple(tuple(p) for p in self.plan_pairs),
                           collision_tags=tuple(self.plan_tags),
                           partial_sums=self.partial_sums)


def _complex_of(v):
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def config_from_dict(d: dict, name: str = "config") -> FamilyConfig:
    try:
        quad = QuadConfig(**d.get("quadrature", {}))
        plan = d.get("plan", {})
        return FamilyConfig(
            name=d.get("name", name),
            kind=d["kind"],
            centers=tuple(_complex_of(v) for v in d.get("centers", [])),
            directions=tuple(_complex_of(v) for v in d.get("directions", [])),
            fixed_roots=tuple(_complex_of(v) for v in d.get("fixed_roots", [])),
            eps0=float(d.get("eps0", 0.0)),
            ratio=float(d.get("ratio", 10.0 ** 0.25)),
            count=int(d.get("count", 0)),
            l_grid=tuple(_complex_of(v) for v in d.get("l_grid", [])),
            plan_pairs=tuple(tuple(p) for p in plan.get("pairs", [])),
            plan_tags=tuple(plan.get("collision_tags", [])),
            partial_sums=bool(plan.get("partial_sums", False)),
            quad=quad,
        )
    except KeyError as exc:
        raise ConfigError(f"missing config field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config: {exc}") from exc


def load_config(path: str) -> FamilyConfig:
    text = open(path, "rb").read()
    if path.endswith(".json"):
        d = json.loads(text)
    else:
        import tomli
        d = tomli.loads(text.decode())
    return config_from_dict(d, name=path)


def bundled_config(name: str) -> FamilyConfig:
    """Reference fixtures: 'f1', 'f3', 'r1'."""
    import tomli
    ref = resources.files("skperiods") / "configs" / f"{name}.toml"
    try:
        d = tomli.loads(ref.read_text())
    except FileNotFoundError:
        raise ConfigError(f"no bundled config named {name!r}") from None
    return config_from_dict(d, name=name)


def degenerate_reduced(config: FamilyConfig):
    """The curve at eps = 0 (collided pairs become even double-root
    clusters) and a pairing plan for its reduced cycle set: each double
    cluster is merged into the cluster group of the following plan pair."""
    roots, mults = [], []
    for c in config.centers:
        roots.append(complex(c))
        mults.append(2)
    for r in config.fixed_roots:
        roots.append(complex(r))
        mults.append(1)
    order = sorted(range(len(roots)), key=lambda i: (roots[i].real, roots[i].imag))
    curve = HyperellipticCurve.from_roots([roots[i] for i in order],
                                          mults=[mults[i] for i in order])
    # rebuild the plan on the reduced cluster indexing: walk the clusters in
    # order, grouping each even (double) cluster with the next odd pair
    n_cl = len(roots)
    even = {i for i, oi in enumerate(order) if mults[oi] == 2}
    pend = []
    pairs = []
    for i in range(n_cl):
        if i in even:
            pend.append(i)
        else:
            pend.append(i)
            if len([j for j in pend if j not in even]) == 2:
                pairs.append(tuple(pend))
                pend = []
    if pend:
        pairs[-1] = tuple(pairs[-1]) + tuple(pend)
    plan = PairingPlan(pairs=tuple(pairs), collision_tags=())
    return curve, plan
