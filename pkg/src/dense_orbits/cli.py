"""Command line front end: ``dol <subcommand> [options]``.

Exit codes: 0 when every verdict passes, 1 when a verdict fails, 2 on usage
or input errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import conjugation, density, growth, lipschitz, orbit, packing, reports
from .numerics import TolerancePolicy

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _policy(args) -> TolerancePolicy:
    kw = {}
    if getattr(args, "depth", None) is not None:
        kw["backward_depth"] = args.depth
    try:
        return TolerancePolicy(**kw)
    except ValueError as exc:
        raise UsageError(str(exc))


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(args, *names) -> dict:
    return {"subcommand": args.command, **{n: getattr(args, n) for n in names}}


def _read_input(path: str):
    try:
        return reports.read_points_csv(path)
    except FileNotFoundError:
        raise UsageError(f"input file not found: {path}")
    except (ValueError, IndexError) as exc:
        raise UsageError(f"cannot parse {path}: {exc}")


def cmd_orbit(args) -> int:
    policy = _policy(args)
    out = _outdir(args)
    config = _config(args, "m", "eps", "depth")
    try:
        targets, it, orb, hits = orbit.dense_orbit(args.m, args.eps, policy, args.seed)
    except (orbit.TargetUnaddressable, orbit.TargetMissed, orbit.OrbitGrazesBadSet) as exc:
        reports.write_json(
            out / "orbit.json",
            reports.envelope("orbit", config, args.seed, policy.to_dict(), {"error": str(exc)}, False),
        )
        print(f"orbit: {exc}", file=sys.stderr)
        return EXIT_FAIL
    reports.write_orbit_csv(out / "orbit.csv", orb)
    by_index = dict(hits)
    table = [
        {
            "target": cp.index,
            "time": cp.time,
            "depth": cp.depth,
            "epsilon": targets[cp.index].radius,
            "hit_distance": by_index[cp.index],
        }
        for cp in it.checkpoints
    ]
    passed = orb.max_defect < policy.shadowing_tol
    result = {
        "m": args.m,
        "itinerary_length": len(it),
        "targets": len(targets),
        "perturbed_targets": sum(1 for t in targets if t.retries),
        "max_shadowing_defect": orb.max_defect,
        "eval_error_bound": orb.eval_error_bound,
        "max_hit_distance": max(by_index.values()),
        "checkpoints": table,
    }
    reports.write_json(out / "orbit.json", reports.envelope("orbit", config, args.seed, policy.to_dict(), result, passed))
    return EXIT_OK if passed else EXIT_FAIL


def cmd_push(args) -> int:
    policy = _policy(args)
    pts, _, last = _read_input(args.input)
    if last != "defect":
        raise UsageError(f"{args.input} is not an orbit CSV")
    out = _outdir(args)
    config = _config(args, "input")
    try:
        d = conjugation.push_orbit(pts)
    except conjugation.OutsideDomain as exc:
        reports.write_json(
            out / "push.json",
            reports.envelope("push", config, args.seed, policy.to_dict(), {"error": str(exc)}, False),
        )
        print(f"push: {exc}", file=sys.stderr)
        return EXIT_FAIL
    reports.write_dorbit_csv(out / "d_orbit.csv", d)
    passed = d.max_defect < policy.conjugacy_rel_tol
    result = {"points": len(d), "max_conj_defect": d.max_defect}
    reports.write_json(out / "push.json", reports.envelope("push", config, args.seed, policy.to_dict(), result, passed))
    return EXIT_OK if passed else EXIT_FAIL


def cmd_density(args) -> int:
    pts, _, last = _read_input(args.input)
    m = pts.shape[1]
    dom = density.SlitAnnulusProduct(m) if last == "conj_defect" else density.OmegaProduct(m)
    out = _outdir(args)
    config = _config(args, "input", "eps")
    eps = sorted(args.eps, reverse=True)
    try:
        reps = density.density_profile(pts, dom, eps)
    except density.EmptyDomain as exc:
        raise UsageError(str(exc))
    passed = all(r.coverage_fraction == 1.0 for r in reps)
    result = {
        "domain": "slit-annulus" if last == "conj_defect" else "omega",
        "m": m,
        "points": int(pts.shape[0]),
        "reports": [r.to_dict() for r in reps],
    }
    reports.write_json(out / "density.json", reports.envelope("density", config, args.seed, _policy(args).to_dict(), result, passed))
    return EXIT_OK if passed else EXIT_FAIL


def cmd_pack(args) -> int:
    try:
        V = packing.parse_geometry(args.geom)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad --geom: {exc}")
    out = _outdir(args)
    config = _config(args, "geom", "h0")
    try:
        h, res = packing.verify_lemma(V, args.h0)
        result = {"h_final": h, **res.to_dict(), "rho": packing.rho(V.m)}
        passed = res.bound_ok
    except packing.IterationCap as exc:
        result = {"error": str(exc), "bound_ok": False}
        passed = False
    reports.write_json(out / "pack.json", reports.envelope("pack", config, args.seed, _policy(args).to_dict(), result, passed))
    return EXIT_OK if passed else EXIT_FAIL


def cmd_growth(args) -> int:
    if not 0 < args.target < 1:
        raise UsageError("--target must lie in (0, 1)")
    try:
        p = growth.GrowthParams(args.m, args.u_volume, args.v0)
    except ValueError as exc:
        raise UsageError(str(exc))
    out = _outdir(args)
    config = _config(args, "m", "target", "u_volume", "v0")
    steps = growth.steps_to_fraction(p, 1.0 - args.target)
    steps99 = growth.steps_to_fraction(p, 0.01)
    v = growth.iterate(p, steps)
    closed = growth.closed_form(p, np.arange(steps + 1))
    rel = float(np.max(np.abs(v - closed) / np.maximum(np.abs(closed), 1e-300))) if steps else 0.0
    gap = growth.iterate_gap(p, steps)
    monotone = bool(np.all(gap > 0) and np.all(np.diff(gap) < 0)) if p.v0 < p.U_volume else True
    # each update rounds once, so the forward error grows linearly in the step count
    rel_tol = max(1e-12, 4.0 * steps * np.finfo(float).eps)
    with open(out / "growth.csv", "w") as fh:
        fh.write("j,v\n")
        for j, vj in enumerate(v):
            fh.write(f"{j},{reports.fmt(vj)}\n")
    result = {
        "kappa": p.kappa,
        "steps_to_99": steps99,
        "steps_to_target": steps,
        "final_v": float(v[-1]),
        "max_rel_closed_form_error": rel,
        "monotone_bounded": monotone,
        "rel_tolerance": rel_tol,
    }
    passed = monotone and rel < rel_tol
    reports.write_json(out / "growth.json", reports.envelope("growth", config, args.seed, _policy(args).to_dict(), result, passed))
    return EXIT_OK if passed else EXIT_FAIL


def cmd_lipschitz(args) -> int:
    out = _outdir(args)
    config = _config(args, "graph", "input", "c", "trials", "m")
    if args.input:
        try:
            s = lipschitz.read_graph_csv(args.input)
        except FileNotFoundError:
            raise UsageError(f"input file not found: {args.input}")
        except ValueError as exc:
            raise UsageError(str(exc))
        if args.c is None:
            raise UsageError("--c is required with --input")
        c = args.c
        fn = lipschitz.mcshane_extension(s, c)
        m = s.m
    else:
        if args.graph not in lipschitz.NAMED_GRAPHS:
            raise UsageError(f"unknown graph {args.graph!r}")
        fn, c_default = lipschitz.NAMED_GRAPHS[args.graph]
        c = c_default if args.c is None else args.c
        m = args.m
        grid = np.linspace(-1.0, 1.0, 41)
        pts = np.array(np.meshgrid(*([grid] * (2 * m - 1)), indexing="ij")).reshape(2 * m - 1, -1).T
        s = lipschitz.GraphSample.from_function(fn, pts, m)
    if not c > 0:
        raise UsageError("--c must be positive")
    try:
        est = lipschitz.lipschitz_estimate(s)
    except lipschitz.TooFewPoints as exc:
        raise UsageError(str(exc))
    violations = lipschitz.cone_check(s, c)
    verdict = lipschitz.star_property_check(fn, c, args.trials, args.seed, m=m)
    passed = not violations and verdict.passed
    result = {
        "m": m,
        "samples": len(s),
        "lipschitz_estimate": est,
        "claimed_c": c,
        "cone_violations": len(violations),
        "first_cone_violation": list(violations[0]) if violations else None,
        "star_property": verdict.to_dict(),
    }
    reports.write_json(out / "lipschitz.json", reports.envelope("lipschitz", config, args.seed, _policy(args).to_dict(), result, passed))
    return EXIT_OK if passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dol", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=".", help="output directory")
        return p

    p = common(sub.add_parser("orbit", help="build a certified dense orbit"))
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--eps", type=_float_list, required=True, help="decreasing resolutions, e.g. 1.0,0.5")
    p.add_argument("--depth", type=int, default=None, help="backward evaluation depth")
    p.set_defaults(func=cmd_orbit)

    p = common(sub.add_parser("push", help="push an orbit CSV to the slit annulus"))
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_push)

    p = common(sub.add_parser("density", help="grid coverage of an orbit CSV"))
    p.add_argument("--input", required=True)
    p.add_argument("--eps", type=_float_list, required=True)
    p.set_defaults(func=cmd_density)

    p = common(sub.add_parser("pack", help="check the ball packing bound"))
    p.add_argument("--geom", default="unit-square", help="unit-square, unit-disc, l-shape or JSON pieces")
    p.add_argument("--h0", type=float, default=0.5)
    p.set_defaults(func=cmd_pack)

    p = common(sub.add_parser("growth", help="volume growth recurrence"))
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--target", type=float, default=0.99, help="fraction of |U| to reach")
    p.add_argument("--u-volume", dest="u_volume", type=float, default=1.0)
    p.add_argument("--v0", type=float, default=0.0)
    p.set_defaults(func=cmd_growth)

    p = common(sub.add_parser("lipschitz", help="Lipschitz graph checks"))
    p.add_argument("--graph", default="linear", help="zero, linear or neg-abs")
    p.add_argument("--input", default=None, help="CSV v,z_re_1,z_im_1,...,r")
    p.add_argument("--c", type=float, default=None, help="claimed Lipschitz constant")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--trials", type=int, default=10_000)
    p.set_defaults(func=cmd_lipschitz)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "m", 1) < 1:
        parser.error("--m must be >= 1")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
