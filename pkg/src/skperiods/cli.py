"""Command-line front end: config parsing, scan orchestration, and
bit-stable CSV/JSON report serialization.

Exit codes: 0 all declared assertions pass; 1 assertion failure; 2 config
error; 3 numeric abort.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .contour import build_cycle_basis
from .errors import ConfigError, NumericAbort, SKPeriodsError
from .families import FamilyConfig, bundled_config, load_config
from .periods import QuadConfig
from .scans import _ols, degeneration_scan, jacobian_check, monodromy
from .skgeom import coordinates, metric, potential, potential_gradient, radial_scan

SCHEMA_VERSION = 1


def _fmt(x: float) -> str:
    return "%.17g" % float(x)


def _jsonable(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    return obj


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_report(out_dir, name, payload):
    payload = dict(payload)
    payload["schema_version"] = SCHEMA_VERSION
    payload["version"] = __version__
    with open(os.path.join(out_dir, name), "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load(args) -> FamilyConfig:
    if args.config is None:
        raise ConfigError("--config is required for this subcommand")
    if os.path.exists(args.config):
        fam = load_config(args.config)
    else:
        fam = bundled_config(args.config)
    if args.tol is not None:
        quad = QuadConfig(rel_tol=args.tol, abs_tol=fam.quad.abs_tol,
                          max_depth=fam.quad.max_depth)
        fam = dataclasses.replace(fam, quad=quad)
    return fam


def _gram_header(g, n_tags):
    cols = ["eps_abs"]
    if n_tags == 1:
        cols.append("z_van_abs")
    else:
        cols.extend(f"z_van_abs_{k + 1}" for k in range(n_tags))
    for i in range(g):
        for j in range(i, g):
            cols.append(f"imtau_{i + 1}{j + 1}")
    cols.append("err_est")
    return cols


def cmd_degenerate(args) -> int:
    fam = _load(args)
    t0 = time.time()
    rep = degeneration_scan(fam)
    g = rep.rows[0].sample.gram.shape[0]
    tags = rep.rows[0].sample.tags
    header = _gram_header(g, len(tags))
    table = []
    for r in rep.rows:
        row = [r.eps] + list(r.z_van_abs)
        for i in range(g):
            for j in range(i, g):
                row.append(r.sample.gram[i, j])
        row.append(r.err_est)
        table.append(row)
    _write_csv(os.path.join(args.out, "rows.csv"), header, table)

    verdicts = {}
    verdicts["riemann_rows"] = all(
        r.sample.symmetry_defect <= 1e-6 and r.sample.dual_residual <= 1e-8
        and np.linalg.eigvalsh(r.sample.gram).min() > 0 for r in rep.rows)
    verdicts["transverse_divergent"] = all(
        rep.fits[(k, k)].classification == "divergent" for k in tags)
    tang = [i for i in range(g) if i not in tags]
    verdicts["tangential_continuous"] = all(
        rep.fits[(i, i)].classification == "continuous" for i in tang)
    _write_report(args.out, "report.json", {
        "config": fam.name, "kind": fam.kind, "wall_clock": time.time() - t0,
        "rows": [{"eps": r.eps, "z_van_abs": list(r.z_van_abs),
                  "gram": r.sample.gram, "err_est": r.err_est}
                 for r in rep.rows],
        "fits": {f"{i + 1}{j + 1}": rep.fits[(i, j)]
                 for (i, j) in rep.fits},
        "verdicts": verdicts,
    })
    return 0 if all(verdicts.values()) else 1


def cmd_periods(args) -> int:
    fam = _load(args)
    t0 = time.time()
    if fam.kind in ("pair-collision", "multi-collision"):
        curve = fam.curve_at(fam.eps0)
    else:
        curve = fam.curve_at(None)
    basis = build_cycle_basis(curve, fam.plan())
    sample = metric(curve, basis, fam.quad)
    coords = coordinates(curve, basis, fam.quad)
    g = sample.gram.shape[0]
    header = ["idx"]
    header += ["re_z", "im_z", "re_w", "im_w"]
    table = [[i + 1, coords.z[i].real, coords.z[i].imag,
              coords.w[i].real, coords.w[i].imag] for i in range(g)]
    _write_csv(os.path.join(args.out, "periods.csv"), header, table)
    verdicts = {
        "symmetry": sample.symmetry_defect <= 1e-6,
        "positive": bool(np.linalg.eigvalsh(sample.gram).min() > 0),
        "dual_residual": sample.dual_residual <= 1e-8,
    }
    _write_report(args.out, "report.json", {
        "config": fam.name, "wall_clock": time.time() - t0,
        "z": list(coords.z), "w": list(coords.w), "tau": sample.tau,
        "gram": sample.gram, "symmetry_defect": sample.symmetry_defect,
        "dual_residual": sample.dual_residual, "condition": sample.condition,
        "verdicts": verdicts,
    })
    return 0 if all(verdicts.values()) else 1


def cmd_monodromy(args) -> int:
    fam = _load(args)
    t0 = time.time()
    res = monodromy(fam, args.eps if args.eps else fam.eps0, steps=args.steps)
    verdicts = {
        "integer_shifts": max(res.defects) <= 1e-6,
        "a_periods_return": res.a_return_defect <= 1e-8,
    }
    _write_report(args.out, "report.json", {
        "config": fam.name, "wall_clock": time.time() - t0,
        "eps0": res.eps0, "steps": res.steps, "turns": res.turns,
        "shifts": list(res.shifts), "defects": list(res.defects),
        "a_return_defect": res.a_return_defect, "verdicts": verdicts,
    })
    return 0 if all(verdicts.values()) else 1


def cmd_radial(args) -> int:
    fam = _load(args)
    if fam.kind != "radial":
        raise ConfigError("radial subcommand needs a radial family")
    t0 = time.time()
    curve = fam.curve_at(None)
    basis = build_cycle_basis(curve, fam.plan())
    rep = radial_scan(curve, basis, fam.l_grid, fam.quad)
    header = ["l_abs", "tau_residual", "K_residual"]
    table = [[abs(l), tr, kr] for l, tr, kr in
             zip(rep.l_grid, rep.tau_residuals, rep.K_residuals)]
    _write_csv(os.path.join(args.out, "rows.csv"), header, table)
    verdicts = {
        "tau_constant": max(rep.tau_residuals) <= 1e-6,
        "exponent_half": abs(rep.z_exponent - 0.5) <= 1e-3,
        "potential_scaling": max(rep.K_residuals) <= 1e-6,
        "C0_positive": rep.C0 > 0,
    }
    _write_report(args.out, "report.json", {
        "config": fam.name, "wall_clock": time.time() - t0,
        "C0": rep.C0, "K1": rep.K1, "z_exponent": rep.z_exponent,
        "cone_angle": rep.cone_angle, "tau_residuals": list(rep.tau_residuals),
        "K_residuals": list(rep.K_residuals), "verdicts": verdicts,
    })
    return 0 if all(verdicts.values()) else 1


def cmd_potential(args) -> int:
    fam = _load(args)
    t0 = time.time()
    curve = fam.curve_at(fam.eps0 if fam.eps0 else None)
    basis = build_cycle_basis(curve, fam.plan())
    sample = metric(curve, basis, fam.quad)
    coords = coordinates(curve, basis, fam.quad)
    pot = potential(coords)
    grad = potential_gradient(coords, sample.tau)
    verdicts = {"reality": pot.imag_residue <= 1e-8 * max(abs(pot.K), 1e-30)}
    _write_report(args.out, "report.json", {
        "config": fam.name, "wall_clock": time.time() - t0,
        "K": pot.K, "imag_residue": pot.imag_residue,
        "gradient": list(grad), "verdicts": verdicts,
    })
    return 0 if all(verdicts.values()) else 1


def cmd_check(args) -> int:
    """Built-in invariant suite over the bundled reference configs."""
    t0 = time.time()
    rng = np.random.default_rng(args.seed)
    results = {}

    f1 = bundled_config("f1")
    curve = f1.curve_at(0.1)
    basis = build_cycle_basis(curve, f1.plan())
    sample = metric(curve, basis, f1.quad)
    results["f1_riemann"] = bool(
        sample.symmetry_defect <= 1e-6 and
        np.linalg.eigvalsh(sample.gram).min() > 0 and
        sample.dual_residual <= 1e-8)
    results["f1_jacobian"] = jacobian_check(curve, basis, f1.quad) <= 1e-4

    # random genus-1 curve: Riemann relations
    from .contour import PairingPlan
    from .surface import HyperellipticCurve
    pts = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    pts = np.sort_complex(pts * 2.0)
    c1 = HyperellipticCurve.from_roots(list(pts))
    b1 = build_cycle_basis(c1, PairingPlan(pairs=((0, 1), (2, 3)),
                                           collision_tags=()))
    s1 = metric(c1, b1, QuadConfig())
    results["random_genus1_riemann"] = bool(s1.gram[0, 0] > 0)

    r1 = bundled_config("r1")
    curve_r = r1.curve_at(None)
    basis_r = build_cycle_basis(curve_r, r1.plan())
    rep = radial_scan(curve_r, basis_r, r1.l_grid[:3], r1.quad)
    results["r1_scaling"] = bool(max(rep.tau_residuals) <= 1e-6 and
                                 max(rep.K_residuals) <= 1e-6 and rep.C0 > 0)

    if args.out:
        _write_report(args.out, "report.json", {
            "config": "check", "wall_clock": time.time() - t0,
            "seed": args.seed, "verdicts": results,
        })
    ok = all(results.values())
    for k, v in sorted(results.items()):
        print(f"{k}: {'ok' if v else 'FAIL'}")
    return 0 if ok else 1


def main(argv=None) -> int:
    p = argparse.ArgumentParser(
        prog="skperiods",
        description="Period matrices of degenerating hyperelliptic curves "
                    "and special Kähler metric asymptotics.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)
    for name, fn in (("periods", cmd_periods), ("degenerate", cmd_degenerate),
                     ("monodromy", cmd_monodromy), ("radial", cmd_radial),
                     ("potential", cmd_potential), ("check", cmd_check)):
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None,
                        help="TOML/JSON config path or bundled name (f1, f3, r1)")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--tol", type=float, default=None,
                        help="override quadrature relative tolerance")
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--seed", type=int, default=0)
        if name == "monodromy":
            sp.add_argument("--eps", type=float, default=None)
            sp.add_argument("--steps", type=int, default=64)
        sp.set_defaults(fn=fn)
    args = p.parse_args(argv)
    try:
        if args.out and args.out != ".":
            os.makedirs(args.out, exist_ok=True)
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericAbort as exc:
        print(f"numeric abort: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except SKPeriodsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
