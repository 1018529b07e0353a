"""Command-line entry point.

Subcommands: ``sample`` (one map), ``experiment`` (Monte Carlo harness),
``validate`` (structural check of a map file), ``mesh`` (layout export).
Data goes to files or stdout; progress and diagnostics go to stderr.

Exit codes: 0 success, 1 invariant violation, 2 usage error, 3 I/O error,
4 sampling budget exhausted.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, persist, scaling
from .cvs import build_quadrangulation, validate_quadrangulation
from .errors import (
    ConfigError,
    InvariantViolation,
    ParameterError,
    ParseError,
    SamplingBudgetError,
    StablequadError,
)
from .gwtree import sample_labelled_tree
from .offspring import DEFAULT_K_CUT, build_offspring_law
from .seeds import replica_seed

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_BUDGET = 4

OUTDIR_ENV = "STABLEQUAD_OUTDIR"


def _default_outdir() -> str:
    return os.environ.get(OUTDIR_ENV, ".")


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr)


def _add_law_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=1.5, help="tail index in (1, 2)")
    p.add_argument("--p0", type=float, default=1.0 / 3.0, help="P(label increment = 0)")
    p.add_argument("--c-phi", type=float, default=None, help="family parameter (default 1/alpha)")
    p.add_argument("--k-cut", type=int, default=DEFAULT_K_CUT, help="exact pmf table length")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--max-trials", type=int, default=None, help="rejection budget per tree")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stablequad",
        description="Sample heavy-tailed random quadrangulations and measure their scaling exponents.",
    )
    parser.add_argument("--version", action="version", version=f"stablequad {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample one labelled tree and its quadrangulation")
    _add_law_flags(p)
    p.add_argument("--edges", type=int, required=True, help="number of tree edges = map faces")
    p.add_argument("--epsilon", type=int, choices=(-1, 1), default=None,
                   help="root orientation; default: seeded fair coin")
    p.add_argument("--out-tree", type=str, default=None, help="write the tree (SQT v1)")
    p.add_argument("--out-map", type=str, default=None, help="write the map (SQM v1)")
    p.add_argument("--out-mesh", type=str, default=None, help="write an OBJ mesh")
    p.add_argument("--layout", choices=("tutte", "spring"), default="tutte")
    p.add_argument("--outdir", type=str, default=None, help=f"output directory (default ${OUTDIR_ENV} or .)")

    p = sub.add_parser("experiment", help="run a Monte Carlo scaling experiment")
    _add_law_flags(p)
    p.add_argument("--kind", choices=("radius", "volume", "maxdeg", "voltail", "paths"), required=True)
    p.add_argument("--sizes", type=str, default="1024,4096,16384,65536",
                   help="comma-separated sizes (radius/maxdeg)")
    p.add_argument("--n", type=int, default=None, help="single size (volume/voltail/paths)")
    p.add_argument("--replicas", type=int, default=200)
    p.add_argument("--centers", type=int, default=200, help="total centers (volume/voltail)")
    p.add_argument("--center-policy", choices=("uniform", "root", "pointed"), default="uniform")
    p.add_argument("--r-min", type=int, default=4)
    p.add_argument("--r-window-beta", type=float, default=0.5)
    p.add_argument("--grid-points", type=int, default=257)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--outdir", type=str, default=None)

    p = sub.add_parser("validate", help="validate an SQM map file")
    p.add_argument("path", type=str)

    p = sub.add_parser("mesh", help="export a mesh from an SQM map file")
    p.add_argument("path", type=str)
    p.add_argument("out", type=str)
    p.add_argument("--layout", choices=("tutte", "spring"), default="tutte")
    p.add_argument("--seed", type=int, default=0)

    return parser


def cmd_sample(args) -> int:
    outdir = Path(args.outdir or _default_outdir())
    outdir.mkdir(parents=True, exist_ok=True)
    law = build_offspring_law(args.alpha, args.c_phi, args.k_cut)
    rng = np.random.Generator(np.random.PCG64(replica_seed(args.seed, 0)))
    lt, trials = sample_labelled_tree(law, args.edges, rng, args.p0, args.max_trials)
    epsilon = args.epsilon
    if epsilon is None:
        epsilon = 1 if rng.random() < 0.5 else -1
    q = build_quadrangulation(lt, epsilon)
    report = validate_quadrangulation(q)
    if not report.ok:
        raise InvariantViolation(f"fresh sample failed checks: {report.failing()}")

    outputs = []
    if args.out_tree:
        path = outdir / args.out_tree
        persist.write_tree(path, lt, alpha=args.alpha, seed=args.seed)
        outputs.append(path)
    if args.out_map:
        path = outdir / args.out_map
        persist.write_map(path, q)
        outputs.append(path)
    if args.out_mesh:
        path = outdir / args.out_mesh
        persist.export_mesh(q, path, layout=args.layout, seed=args.seed)
        outputs.append(path)

    d_root = int(1 - lt.labels.min())
    max_deg = int(q.degrees().max())
    law_info = {"alpha": law.alpha, "c_phi": law.c_phi, "K_cut": law.k_cut, "c": law.c}
    if outputs:
        manifest = outdir / (Path(outputs[0]).stem + ".manifest.json")
        persist.write_manifest(
            manifest,
            kind="sample",
            config={
                "alpha": args.alpha, "p0": args.p0, "edges": args.edges,
                "epsilon": epsilon, "law": law_info, "trials": trials,
            },
            constants=scaling.RescalingConstants.compute(args.alpha, law.c, args.p0).as_dict(),
            master_seed=args.seed,
            replica_seeds=[replica_seed(args.seed, 0)],
            outputs=outputs,
        )
        _progress(f"wrote {len(outputs)} file(s) + manifest {manifest}")
    print(
        f"V={q.n_vertices} E={q.n_edges} F={q.n_faces} "
        f"d(root,pointed)={d_root} max_degree={max_deg}"
    )
    return EXIT_OK


def _experiment_config(args) -> scaling.ExperimentConfig:
    if args.kind in ("volume", "voltail", "paths"):
        if args.n is None:
            raise ConfigError(f"--n is required for kind={args.kind}")
        sizes = (args.n,)
    else:
        try:
            sizes = tuple(int(tok) for tok in args.sizes.split(","))
        except ValueError:
            raise ConfigError(f"bad --sizes {args.sizes!r}") from None
    return scaling.ExperimentConfig(
        alpha=args.alpha,
        p0=args.p0,
        c_phi=args.c_phi,
        k_cut=args.k_cut,
        sizes=sizes,
        replicas=args.replicas,
        master_seed=args.seed,
        centers=args.centers,
        center_policy=args.center_policy,
        r_min=args.r_min,
        r_window_beta=args.r_window_beta,
        grid_points=args.grid_points,
        max_trials=args.max_trials,
        threads=args.threads,
    )


def cmd_experiment(args) -> int:
    cfg = _experiment_config(args)
    outdir = Path(args.outdir or _default_outdir())
    outdir.mkdir(parents=True, exist_ok=True)
    kind = args.kind
    csv_path = outdir / f"{kind}.csv"
    extra: dict = {}
    _progress(f"running {kind} experiment: sizes={cfg.sizes} replicas={cfg.replicas}")

    if kind == "radius":
        res = scaling.run_radius_experiment(cfg)
        persist.write_radius_csv(res, csv_path)
        seeds = [rec.seed for rec in res.records]
        print(f"fitted slope {res.fit.slope:.4f} +/- {res.fit.stderr:.4f} (target {res.target:.4f})")
        extra["fit"] = {"slope": res.fit.slope, "stderr": res.fit.stderr,
                        "r_squared": res.fit.r_squared, "target": res.target}
    elif kind == "maxdeg":
        res = scaling.run_maxdegree_experiment(cfg)
        persist.write_maxdeg_csv(res, csv_path)
        seeds = [rec.seed for rec in res.records]
        print(f"fitted slope {res.fit.slope:.4f} +/- {res.fit.stderr:.4f} (target {res.target:.4f}); "
              f"map-degree slope {res.fit_map.slope:.4f}")
        extra["fit"] = {"slope": res.fit.slope, "stderr": res.fit.stderr, "target": res.target,
                        "map_slope": res.fit_map.slope}
    elif kind == "volume":
        res = scaling.run_volume_experiment(cfg)
        persist.write_profile_csv(res, csv_path)
        seeds = list(res.replica_seeds)
        print(f"fitted slope {res.fit.slope:.4f} +/- {res.fit.stderr:.4f} (target {res.target:.4f}) "
              f"window={res.window}")
        extra["fit"] = {"slope": res.fit.slope, "stderr": res.fit.stderr, "target": res.target,
                        "window": list(res.window),
                        "window_sensitivity": [list(t) for t in res.window_sensitivity]}
    elif kind == "voltail":
        res = scaling.run_voltail_experiment(cfg)
        persist.write_voltail_csv(res, csv_path)
        seeds = list(res.replica_seeds)
        if res.fit is None or res.inconclusive:
            print(f"tail fit inconclusive ({len(res.survival_points)} tail points); "
                  f"bracket [{res.bracket[0]:.4f}, {res.bracket[1]:.4f}]")
        else:
            print(f"fitted tail exponent {res.fit.slope:.4f} +/- {res.fit.stderr:.4f} "
                  f"(bracket [{res.bracket[0]:.4f}, {res.bracket[1]:.4f}], "
                  f"sharp candidate {res.sharp_candidate:.4f})")
        extra["fit"] = {
            "slope": None if res.fit is None else res.fit.slope,
            "inconclusive": res.inconclusive,
            "bracket": list(res.bracket),
            "radius": res.radius,
        }
    else:  # paths
        res = scaling.emit_rescaled_paths(cfg)
        persist.write_paths_csv(res, csv_path)
        seeds = list(res.replica_seeds)
        print(f"wrote rescaled paths for {len(res.tables)} replica(s), "
              f"{cfg.grid_points} grid points each")

    manifest = outdir / f"{kind}.manifest.json"
    persist.write_manifest(
        manifest,
        kind=kind,
        config=cfg.as_dict(),
        constants=cfg.constants().as_dict(),
        master_seed=cfg.master_seed,
        replica_seeds=seeds,
        outputs=[csv_path],
        extra=extra,
    )
    _progress(f"wrote {csv_path} and {manifest}")
    return EXIT_OK


def cmd_validate(args) -> int:
    q = persist.read_map(args.path)  # raises ParseError on structural failure
    report = validate_quadrangulation(q)
    for name, passed in report.checks.items():
        print(f"{'PASS' if passed else 'FAIL'} {name}")
    return EXIT_OK if report.ok else EXIT_INVARIANT


def cmd_mesh(args) -> int:
    q = persist.read_map(args.path)
    res = persist.export_mesh(q, args.out, layout=args.layout, seed=args.seed)
    print(f"wrote {res.path}: {res.n_vertices} vertices, {res.n_faces} quad faces")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors and 0 on --help/--version
        return int(exc.code or 0)
    try:
        if args.command == "sample":
            return cmd_sample(args)
        if args.command == "experiment":
            return cmd_experiment(args)
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "mesh":
            return cmd_mesh(args)
        parser.error(f"unknown command {args.command!r}")
        return EXIT_USAGE
    except (ParameterError, ConfigError) as exc:
        _progress(f"error: {exc}")
        return EXIT_USAGE
    except SamplingBudgetError as exc:
        _progress(f"sampling budget exhausted: {exc}")
        return EXIT_BUDGET
    except InvariantViolation as exc:
        _progress(f"invariant violation: {exc}")
        return EXIT_INVARIANT
    except (ParseError, OSError) as exc:
        _progress(f"i/o error: {exc}")
        return EXIT_IO
    except StablequadError as exc:
        _progress(f"error: {exc}")
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
