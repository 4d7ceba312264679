"""Command-line front end.

Subcommands ``profile``, ``solve``, ``verify``, ``mesh`` and ``rerun``.  Exit codes:
0 success, 1 verification failure, 2 input error, 3 margin collapse,
4 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import checks
from .errors import DomainError, MarginCollapse, NonConvergence, NotBracketed, TranslatorError
from .export import (
    RunManifest,
    domain_from_table,
    height_field,
    read_grid_binary,
    read_grid_csv,
    read_profile_csv,
    revolve_polyline,
    write_grid_binary,
    write_grid_csv,
    write_json,
    write_obj,
    write_series_csv,
    _read_table,
)
from .graphical import (
    BoxDomain,
    GridSolution,
    SolverConfig,
    horosphere_graph,
    rectangle_problem,
    rotational_graph,
    solve_dirichlet,
)
from .horosphere import branch_for_family, build_profile
from .numerics import ToleranceConfig
from .rotational import bowl, spacelike_profile, spindle, timelike_profile

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_MARGIN, EXIT_NONCONV = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


def _range(text: str):
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a range lo:hi, got {text!r}") from None
    if not hi > lo:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _grid(text: str):
    try:
        shape = tuple(int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a grid like 65x65, got {text!r}") from None
    return shape


def _tolerances(args) -> ToleranceConfig:
    return ToleranceConfig(abs_tol=args.abs_tol, rel_tol=args.rel_tol)


def _params(args) -> dict:
    skip = {"func", "out", "manifest"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _manifest_path(out: Path, given) -> Path:
    return Path(given) if given else out.with_suffix(".json")


# ---------------------------------------------------------------- profile


def cmd_profile(args) -> int:
    cfg = _tolerances(args)
    out = Path(args.out)
    extra = {}
    if args.family == "horosphere":
        if args.branch is None:
            raise InputError("--branch f1..f8 is required for horosphere profiles")
        if args.s is None:
            raise InputError("--s lo:hi is required for horosphere profiles")
        branch = branch_for_family(args.branch, args.n)
        s = np.linspace(args.s[0], args.s[1], args.samples)
        s0 = 0.0 if args.s0 is None else args.s0
        curve = build_profile(branch, s, s0, args.f0)
        series = (curve.s, curve.w, curve.f)
    else:
        kind = args.type
        if kind is None:
            raise InputError("--type bowl|spacelike|timelike|spindle is required")
        if kind == "bowl":
            grid = None if args.s is None else np.linspace(args.s[0], args.s[1], args.samples)
            curve = bowl(args.n, args.s_max, args.delta, cfg, args.f0, grid)
            series = (curve.s, curve.w, curve.f)
        elif kind in ("spacelike", "timelike"):
            if args.s0 is None or args.z0 is None:
                raise InputError(f"--s0 and --z0 are required for {kind} profiles")
            if kind == "spacelike":
                curve, tag = spacelike_profile(args.n, args.s0, args.z0, cfg, args.s_max, args.f0)
                extra["limit_tag"] = tag
            else:
                curve, rep = timelike_profile(args.n, args.s0, args.z0, cfg, args.f0)
                extra.update(limit_tag=curve.limit_tag, A_bound=rep.A_bound,
                             detected_blow_up_s=rep.detected_blow_up_s, limit_s=rep.limit_s,
                             within_bound=rep.within_bound)
            series = (curve.s, curve.w, curve.f)
        else:
            sp = spindle(args.n, args.s_top, cfg)
            p, m = sp.f_plus, sp.f_minus
            # fused curve in t order: f_plus up to the top, then f_minus back down
            series = (
                np.concatenate([p.s, m.s[::-1]]),
                np.concatenate([p.w, m.w[::-1]]),
                np.concatenate([p.f, m.f[::-1]]),
            )
            extra.update(segments=[len(p), len(m)], g_ddot_top=sp.g_ddot_top, s_top=sp.s_max, t0=sp.t0)
    params = _params(args)
    params.update(extra)
    mpath = _manifest_path(out, args.manifest)
    manifest = RunManifest("profile", params, tolerances=cfg.as_dict(), outputs=[str(out), str(mpath)])
    write_series_csv(out, *series, manifest)
    write_json(mpath, {"manifest": _manifest_dict(manifest)})
    print(f"wrote {out} ({len(series[0])} samples)")
    return EXIT_OK


def _manifest_dict(m: RunManifest) -> dict:
    return json.loads(m.to_json())


# ---------------------------------------------------------------- solve


def _solver_cfg(args) -> SolverConfig:
    return SolverConfig(tol=args.tol, max_iter=args.max_iter, margin_floor=args.margin_floor,
                        operator=args.operator)


def cmd_solve(args) -> int:
    cfg = _solver_cfg(args)
    out = Path(args.out)
    comparison = {}
    if args.preset is None and args.boundary is None:
        raise InputError("give --preset or --boundary")
    n = args.n if args.n is not None or args.boundary else 2
    if args.preset == "rectangle":
        if args.branch is None:
            raise InputError("--branch is required for the rectangle preset")
        branch = branch_for_family(args.branch, n)
        (a1, b1), (a2, b2) = args.rect
        shape = args.grid or (33, 33)
        if len(shape) < 2:
            raise InputError("the rectangle needs a grid with at least two axes")
        extra = [(0.0, 1.0)] * (len(shape) - 2)
        s0 = args.s0 if args.s0 is not None else 0.0
        sol, rect = rectangle_problem(branch, a1, b1, a2, b2, shape, cfg, s0, args.f0, extra)
        report = rect.solver_report
        comparison = {"max_error": rect.max_error, "h": rect.h}
    elif args.preset in ("exact-linear", "bowl"):
        shape = args.grid or (33, 33)
        if args.preset == "exact-linear":
            exact = horosphere_graph(branch_for_family("f1", n))
            bounds = args.bounds or [(1.0, 2.0), (0.0, 1.0)]
        else:
            exact = rotational_graph(bowl(n, s_max=8.0))
            bounds = args.bounds or [(1.2, 1.8), (0.3, 0.9)]
        if len(bounds) != len(shape):
            raise InputError("--bounds and --grid must have the same number of axes")
        dom = BoxDomain(bounds, shape, n)
        ex = GridSolution.from_function(dom, exact)
        sol, report = solve_dirichlet(dom, ex, None, cfg)
        comparison = {"max_error": float(np.max(np.abs(sol.values - ex.values))), "h": dom.h}
    else:
        try:
            _, header, table = _read_table(args.boundary)
            dom, values = domain_from_table(header, table, n)
        except (DomainError, ValueError) as exc:
            raise InputError(f"cannot parse boundary file {args.boundary}: {exc}") from None
        sol, report = solve_dirichlet(dom, values, None, cfg)
    params = _params(args)
    mpath = _manifest_path(out, args.manifest)
    manifest = RunManifest("solve", params, tolerances=cfg.as_dict(), outputs=[str(out), str(mpath)])
    if args.format == "binary":
        write_grid_binary(out, sol, manifest)
    else:
        write_grid_csv(out, sol, manifest)
    payload = {"manifest": _manifest_dict(manifest), "report": report.as_dict()}
    if comparison:
        payload["comparison"] = comparison
    write_json(mpath, payload)
    msg = f"converged in {report.iterations} iterations"
    if comparison:
        msg += f", max error {comparison['max_error']:.3e}"
    print(msg)
    return EXIT_OK if report.converged else EXIT_NONCONV


# ---------------------------------------------------------------- verify


def cmd_verify(args) -> int:
    names = list(checks.SUITES) if args.suite == "all" else [args.suite]
    reports = [checks.run_suite(name) for name in names]
    failures = sum(r["failures"] for r in reports)
    payload = reports[0] if len(reports) == 1 else {"suites": reports, "failures": failures}
    if args.out:
        write_json(args.out, payload)
    for r in reports:
        print(f"{r['suite']}: {r['passes']} passed, {r['failures']} failed")
        for c in r["cases"]:
            if not c["passed"]:
                print(f"  FAIL {c['name']}: {c['value']:.6g} (tolerance {c['tolerance']:.3g})")
    return EXIT_OK if failures == 0 else EXIT_VERIFY


# ---------------------------------------------------------------- mesh


def cmd_mesh(args) -> int:
    src = Path(args.input)
    out = Path(args.out)
    if src.suffix == ".bin":
        manifest, dom, values = read_grid_binary(src)
        verts, faces = height_field(GridSolution(dom, values))
    else:
        try:
            manifest, header, _ = _read_table(src)
        except DomainError as exc:
            raise InputError(str(exc)) from None
        if header == ["s", "w", "f"]:
            _, table = read_profile_csv(src)
            n = args.n if args.n is not None else (manifest.parameters.get("n") if manifest else None)
            if n is None:
                raise InputError("dimension unknown: pass --n")
            s, f = table[:, 0], table[:, 2]
            if manifest is not None and manifest.parameters.get("type") == "spindle":
                # close the seam at the top, where g(t0) = s_top and f = t0
                k = manifest.parameters["segments"][0]
                top_s = manifest.parameters["s_top"]
                t0 = manifest.parameters.get("t0", 0.0)
                s = np.concatenate([s[:k], [top_s], s[k:]])
                f = np.concatenate([f[:k], [t0], f[k:]])
            verts, faces = revolve_polyline(s, f, int(n), args.angular, args.model)
        else:
            manifest, dom, values = read_grid_csv(src)
            verts, faces = height_field(GridSolution(dom, values))
    params = _params(args)
    m = RunManifest("mesh", params, outputs=[str(out)])
    write_obj(out, verts, faces, m)
    print(f"wrote {out} ({len(verts)} vertices, {len(faces)} triangles)")
    return EXIT_OK


# ---------------------------------------------------------------- rerun


def _load_manifest(path: Path) -> RunManifest:
    if path.suffix == ".json":
        data = json.loads(path.read_text())
        return RunManifest.from_json(json.dumps(data.get("manifest", data)))
    if path.suffix == ".bin":
        return read_grid_binary(path)[0]
    for line in path.read_text().splitlines():
        if line.startswith("# manifest "):
            return RunManifest.from_json(line[len("# manifest "):])
    raise InputError(f"{path} carries no manifest")


def cmd_rerun(args) -> int:
    """Replay the run recorded in a manifest, writing to ``--out``."""
    manifest = _load_manifest(Path(args.source))
    commands = {"profile": cmd_profile, "solve": cmd_solve, "mesh": cmd_mesh}
    if manifest.subcommand not in commands:
        raise InputError(f"cannot rerun a {manifest.subcommand!r} manifest")
    ns = argparse.Namespace(**manifest.parameters)
    ns.out, ns.manifest = args.out, args.manifest
    return commands[manifest.subcommand](ns)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcf-translators",
        description="Translating solitons of mean curvature flow in H^n x R",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="construct a profile curve and write (s, w, f)",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--family", choices=["horosphere", "rotational"], required=True)
    p.add_argument("--branch", help="horosphere family f1..f8")
    p.add_argument("--type", choices=["bowl", "spacelike", "timelike", "spindle"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=_range, help="sample range lo:hi")
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--s0", type=float, default=None)
    p.add_argument("--f0", type=float, default=0.0)
    p.add_argument("--z0", type=float, default=None)
    p.add_argument("--s-max", type=float, default=10.0)
    p.add_argument("--s-top", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=1e-6)
    p.add_argument("--abs-tol", type=float, default=1e-10)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--out", default="profile.csv")
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("solve", help="solve the graphical Dirichlet problem",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--preset", choices=["rectangle", "exact-linear", "bowl"])
    p.add_argument("--boundary", help="grid CSV (x1,...,xn,u) whose boundary nodes hold the data")
    p.add_argument("--branch", help="horosphere family for the rectangle preset")
    p.add_argument("--n", type=int, default=None,
                   help="ambient dimension; 2 for presets, the column count for --boundary")
    p.add_argument("--grid", type=_grid, default=None, help="e.g. 65x65")
    p.add_argument("--bounds", type=lambda t: [_range(v) for v in t.split(",")], default=None,
                   help="box as lo:hi,lo:hi starting with x1")
    p.add_argument("--rect", type=lambda t: [_range(v) for v in t.split(",")],
                   default=[(-0.5, 0.5), (0.0, 1.0)], help="a1:b1,a2:b2 in (-ln x1, x2)")
    p.add_argument("--s0", type=float, default=None)
    p.add_argument("--f0", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--margin-floor", type=float, default=1e-3)
    p.add_argument("--operator", choices=["nondivergence", "divergence"], default="nondivergence")
    p.add_argument("--format", choices=["csv", "binary"], default="csv")
    p.add_argument("--out", default="solution.csv")
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="run the built-in verification suites")
    p.add_argument("--suite", choices=["all"] + list(checks.SUITES), default="all")
    p.add_argument("--out", default=None, help="JSON report path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("mesh", help="export an OBJ mesh of a profile or grid solution",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("input", help="profile CSV, grid CSV or binary grid (.bin)")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--angular", type=int, default=64)
    p.add_argument("--model", choices=["half-space", "hyperboloid"], default="half-space")
    p.add_argument("--out", default="mesh.obj")
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("rerun", help="repeat the run recorded in a manifest (JSON, CSV, .bin or OBJ)")
    p.add_argument("source")
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_rerun)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MarginCollapse as exc:
        print(f"error: margin collapse: {exc}", file=sys.stderr)
        return EXIT_MARGIN
    except NonConvergence as exc:
        print(f"error: no convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except (InputError, DomainError, NotBracketed, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TranslatorError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
