"""Command-line entry points.

Exit codes: 0 on success with all outputs written, 2 for usage errors and
missing input files, 1 for everything else (including a check that finds
violations).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import project as proj


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number list: {text!r}")


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roiform",
        description="Corresponding-particle shape models with "
                    "region-of-interest constraints.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-ellipsoids",
                       help="generate an ellipsoid cohort with sine-wave "
                            "surface constraints and a ready-to-run project")
    p.add_argument("--values", type=_parse_floats, default=[10.0, 20.0, 30.0, 40.0],
                   help="semi-axis values; the cohort is their full (a,b,c) "
                        "product (default: 10 20 30 40)")
    p.add_argument("--subdiv", type=int, default=3,
                   help="icosphere subdivision level (default 3)")
    p.add_argument("--amplitude", type=float, default=0.3,
                   help="sine boundary amplitude as a fraction of the "
                        "c semi-axis (default 0.3)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--target-j", type=int, default=64,
                   help="particles per shape recorded in the project "
                        "(default 64)")
    p.add_argument("--iterations", type=int, default=None,
                   help="iteration cap per split level")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("optimize", help="run the particle optimization "
                                        "described by a project file")
    p.add_argument("--project", required=True)
    p.add_argument("--seed", type=int, default=None,
                   help="override the project's seed")

    p = sub.add_parser("stats", help="PCA model, compactness curve, and "
                                     "mode exports from particle files")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--project", help="use the project's particle outputs")
    src.add_argument("--particles", help="directory of .particles files")
    p.add_argument("--out", default=None,
                   help="output directory (default: <project root>/stats "
                        "or the particle directory)")

    p = sub.add_parser("check", help="re-check existing particle files "
                                     "against the project's constraints")
    p.add_argument("--project", required=True)
    p.add_argument("--tolerance", type=float, default=None,
                   help="violation tolerance in model units (default: "
                        "1e-3 x per-shape bbox diagonal)")

    p = sub.add_parser("bench-scaling",
                       help="time the per-particle constraint-penalty pass "
                            "across particle counts and fit its growth")
    p.add_argument("--j", type=_parse_ints, default=[64, 128, 256, 512],
                   help="particle counts to time (default 64 128 256 512)")
    p.add_argument("--reps", type=int, default=5,
                   help="timed repetitions per count (default 5)")
    p.add_argument("--out", default=None, help="directory for CSV + report")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("serve", help="serve the constraint-painting API "
                                      "and UI for a project")
    p.add_argument("--project", required=True)
    p.add_argument("--port", type=int, default=8008)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", default=None,
                   help="directory of static UI assets to serve at /")
    return parser


def _cmd_gen_ellipsoids(args) -> int:
    if not args.values:
        print("gen-ellipsoids: --values must list at least one length",
              file=sys.stderr)
        return 2
    config = proj.ellipsoid_experiment_config(
        target_j=args.target_j, seed=args.seed, iterations=args.iterations)
    path = proj.generate_ellipsoid_assets(
        args.out, args.values, args.subdiv, args.amplitude, config)
    print(f"wrote {path} ({len(args.values) ** 3} shapes)")
    return 0


def _cmd_optimize(args) -> int:
    project = proj.load_project(args.project)
    report = proj.run_optimize(project, seed=args.seed, progress=print)
    return 0 if report["total_violations"] == 0 else 1


def _cmd_stats(args) -> int:
    if args.project:
        project = proj.load_project(args.project)
        files = [e.particle_path for e in project.shapes]
        out = Path(args.out) if args.out else project.root / "stats"
    else:
        pdir = Path(args.particles)
        if not pdir.is_dir():
            raise FileNotFoundError(f"particle directory not found: {pdir}")
        files = sorted(pdir.glob("*.particles"))
        out = Path(args.out) if args.out else pdir
    missing = [f for f in files if not Path(f).is_file()]
    if missing:
        raise FileNotFoundError(f"particle file not found: {missing[0]}")
    model = proj.run_stats(files, out)
    from .stats import compactness
    comp = compactness(model)
    top = comp[min(2, model.num_modes - 1)] if model.num_modes else float("nan")
    print(f"wrote {out}/model.json ({model.num_shapes} shapes, "
          f"J={model.num_particles}, top-3 cumulative variance {top:.4f})")
    return 0


def _cmd_check(args) -> int:
    project = proj.load_project(args.project)
    report = proj.run_check(project, args.tolerance)
    print(json.dumps(report, indent=2))
    return 0 if report["total_violations"] == 0 else 1


def _cmd_bench(args) -> int:
    if args.reps < 1:
        print("bench-scaling: --reps must be >= 1", file=sys.stderr)
        return 2
    if not args.j:
        print("bench-scaling: --j must list at least one particle count",
              file=sys.stderr)
        return 2
    result = proj.run_bench(args.j, args.reps, args.out, args.seed)
    for j, sec in result["median_seconds"].items():
        print(f"J={j}: {sec * 1e3:.3f} ms per pass (median)")
    if "prefers_linear" in result:
        print(f"AIC linear {result['aic_linear']:.1f} vs quadratic "
              f"{result['aic_quadratic']:.1f} -> "
              f"{'linear' if result['prefers_linear'] else 'quadratic'} "
              f"preferred; t(max)/t(min) = {result['ratio_max_min']:.2f}")
    else:
        print(result["fit_note"])
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    project = proj.load_project(args.project)
    app = create_app(project, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


_COMMANDS = {
    "gen-ellipsoids": _cmd_gen_ellipsoids,
    "optimize": _cmd_optimize,
    "stats": _cmd_stats,
    "check": _cmd_check,
    "bench-scaling": _cmd_bench,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"roiform {args.command}: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"roiform {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
