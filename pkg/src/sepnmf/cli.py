"""Command-line front end.

Subcommands: extract (column extraction on a matrix file), synth (write a
synthetic benchmark instance), bench (recovery sweeps with CSV/JSON
reports), outliers (outlier-tolerant extraction).  Exit codes: 0 ok,
2 usage/input error, 3 algorithmic failure.  Every randomized command takes
--seed (default 0, never wall-clock).
"""

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import matrixio, metrics, outliers, spa, synth
from ._version import __version__
from .errors import (
    ConvergenceFailureError,
    InvalidMatrixError,
    InvalidOptionsError,
    RankDeficiencyError,
)
from .rng import derive_seed
from .selectors import parse_selector

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ALGORITHM = 3


def _one_based(indices):
    return [int(j) + 1 for j in indices]


def cmd_extract(args):
    M = matrixio.read_matrix(args.input, args.format)
    selector = parse_selector(args.selector)
    if args.r > M.shape[1] or args.r > M.shape[0]:
        raise InvalidOptionsError(
            f"r={args.r} exceeds matrix dimensions {M.shape[0]}x{M.shape[1]}")
    opts = spa.ExtractionOptions(
        target_r=args.r,
        residual_tol=args.tol,
        selector=selector,
        variant="fast" if args.fast else "naive",
        l1_normalize=args.normalize,
    )
    result = spa.extract(M, opts)
    print(" ".join(str(j) for j in _one_based(result.indices)))
    if args.out:
        report = {
            "indices": _one_based(result.indices),
            "step_scores": result.step_scores,
            "residual_norms": result.residual_norms,
            "selector": selector.describe(),
            "variant": opts.variant,
            "normalized": args.normalize,
        }
        if args.bound:
            est = spa.recovery_bound(M[:, result.indices], selector)
            report["bound"] = {"eps_max": est.eps_max, "err_factor": est.err_factor,
                               "sigma_r": est.sigma_r, "K": est.K,
                               "mu": est.mu, "L": est.L}
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
        matrixio.write_manifest(args.out + ".manifest.json", sys.argv,
                                _arg_config(args), None, inputs=[args.input])
    return EXIT_OK


def cmd_synth(args):
    config = synth.ExperimentConfig(exp_id=args.exp, delta=args.delta, seed=args.seed,
                                    m=args.m, r=args.r, n_mix=args.n_mix)
    M, truth = synth.generate_instance(config)
    matrix_path = f"{args.out}.{args.format}"
    matrixio.write_matrix(matrix_path, M, args.format)
    sidecar_path = f"{args.out}.truth.json"
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        json.dump(synth.truth_sidecar_dict(config, truth), fh, indent=2)
        fh.write("\n")
    matrixio.write_manifest(f"{args.out}.manifest.json", sys.argv,
                            _arg_config(args), args.seed,
                            inputs=[matrix_path, sidecar_path])
    print(f"wrote {matrix_path} ({M.shape[0]}x{M.shape[1]}) and {sidecar_path}")
    return EXIT_OK


def _parse_grid(args, exp_id):
    if args.deltas:
        try:
            deltas = sorted(float(tok) for tok in args.deltas.split(","))
        except ValueError as exc:
            raise InvalidOptionsError(f"bad --deltas list: {exc}") from exc
        return deltas
    if args.grid:
        parts = args.grid.split(":")
        if len(parts) not in (2, 3):
            raise InvalidOptionsError("--grid expects LO:HI or LO:HI:POINTS")
        try:
            lo, hi = float(parts[0]), float(parts[1])
            points = int(parts[2]) if len(parts) == 3 else args.grid_points
        except ValueError as exc:
            raise InvalidOptionsError(f"bad --grid spec: {exc}") from exc
        return metrics.geometric_grid(lo, hi, points)
    return metrics.default_grid(exp_id, args.grid_points)


def cmd_bench(args):
    exps = [int(tok) for tok in args.exps.split(",")]
    algos = [tok.strip() for tok in args.algos.split(",")]
    for algo in algos:
        if algo not in metrics.ALGORITHM_NAMES:
            raise InvalidOptionsError(
                f"unknown algorithm {algo!r} (choose from {', '.join(metrics.ALGORITHM_NAMES)})")
    os.makedirs(args.out_dir, exist_ok=True)
    jobs = args.jobs
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    rows = []
    summary = {"experiments": {}, "config": _arg_config(args), "version": __version__}
    try:
        for exp in exps:
            config = synth.ExperimentConfig(exp_id=exp, m=args.m, r=args.r,
                                            n_mix=args.n_mix)
            grid = _parse_grid(args, exp)
            exp_summary = {"algorithms": {}, "deltas": grid}
            for algo in algos:
                algo_seed = derive_seed(args.seed, "bench", exp, algo)
                if pool is not None:
                    chunk = max(1, (len(grid) * args.trials) // (jobs * 8))
                    map_fn = lambda fn, it: pool.map(fn, it, chunksize=chunk)
                else:
                    map_fn = None
                report = metrics.sweep(algo, config, grid, args.trials, algo_seed,
                                       map_fn=map_fn)
                for stat in report.per_delta:
                    rows.append((exp, algo, stat.delta, stat.mean_recovery,
                                 stat.trials, stat.failures))
                exp_summary["algorithms"][algo] = {
                    "threshold_full": report.threshold_full,
                    "threshold_99": report.threshold_99,
                }
            if args.bound_draws > 0:
                preds = []
                for k in range(args.bound_draws):
                    wseed = derive_seed(args.seed, "bench-bound", exp, k)
                    W = synth.generate_w(synth.with_delta_seed(config, 0.0, wseed))
                    comp = metrics.bound_report(W, config, parse_selector("l2"),
                                                trials=3, seed=wseed)
                    preds.append(comp.predicted_delta)
                exp_summary["bound"] = {
                    "predicted_delta_avg": sum(preds) / len(preds),
                    "draws": args.bound_draws,
                }
            summary["experiments"][str(exp)] = exp_summary
    finally:
        if pool is not None:
            pool.shutdown()
    csv_path = os.path.join(args.out_dir, "results.csv")
    with open(csv_path, "w", encoding="ascii") as fh:
        fh.write("experiment,algorithm,delta,mean_recovery,trials,failures\n")
        for exp, algo, delta, mean, trials, failures in rows:
            fh.write(f"{exp},{algo},{delta:.17g},{mean:.17g},{trials},{failures}\n")
    summary_path = os.path.join(args.out_dir, "summary.json")
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    matrixio.write_manifest(os.path.join(args.out_dir, "manifest.json"), sys.argv,
                            _arg_config(args), args.seed,
                            inputs=[csv_path, summary_path])
    print(f"wrote {csv_path} and {summary_path}")
    return EXIT_OK


def cmd_outliers(args):
    M = matrixio.read_matrix(args.input, args.format)
    selector = parse_selector(args.selector)
    opts = outliers.OutlierOptions(r=args.r, t=args.t, selector=selector,
                                   qp_tol=args.qp_tol, qp_max_iters=args.qp_max_iters)
    result = outliers.extract_with_outliers(M, opts)
    print(" ".join(str(j) for j in _one_based(result.indices)))
    print(" ".join(f"{s:.12g}" for s in result.step_scores))
    if args.out:
        report = {
            "kept_indices": _one_based(result.indices),
            "kept_scores": result.step_scores,
            "candidate_indices": _one_based(result.candidate_result.indices),
            "scores": [{"index": int(j) + 1, "score": s} for j, s in result.scores],
            "objective": result.abundances.objective,
            "iterations": result.abundances.iterations,
            "converged": result.abundances.converged,
        }
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
        matrixio.write_manifest(args.out + ".manifest.json", sys.argv,
                                _arg_config(args), None, inputs=[args.input])
    if not result.abundances.converged:
        print("warning: abundance solver hit its iteration cap", file=sys.stderr)
        if args.strict:
            return EXIT_ALGORITHM
    return EXIT_OK


def _arg_config(args):
    skip = {"func"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _default_jobs():
    env = os.environ.get("SEPNMF_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sepnmf",
        description="Separable NMF column extraction and benchmark harness")
    parser.add_argument("--version", action="version", version=f"sepnmf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract r columns from a matrix file")
    p.add_argument("input")
    p.add_argument("-r", type=int, required=True, help="number of columns to extract")
    p.add_argument("--selector", default="l2",
                   help="l2, robust:<alpha> or pnorm:<p> (default l2)")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--fast", action="store_true",
                       help="fast norm-update variant (l2 only)")
    group.add_argument("--naive", action="store_true", help="naive residual variant (default)")
    p.add_argument("--normalize", action="store_true", help="l1-normalize columns first")
    p.add_argument("--tol", type=float, default=None, help="residual stopping tolerance")
    p.add_argument("--bound", action="store_true",
                   help="include the recovery noise bound of the extracted columns in --out")
    p.add_argument("--format", choices=("csv", "raw"), default=None)
    p.add_argument("--out", default=None, help="write a JSON report here")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("synth", help="generate a synthetic benchmark instance")
    p.add_argument("--exp", type=int, required=True, choices=(1, 2, 3, 4))
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--m", type=int, default=synth.PAPER_M)
    p.add_argument("--r", type=int, default=synth.PAPER_R)
    p.add_argument("--n-mix", type=int, default=synth.PAPER_N_MIX, dest="n_mix")
    p.add_argument("--format", choices=("csv", "raw"), default="csv")
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="recovery sweeps with CSV/JSON reports")
    p.add_argument("--exps", default="1,2,3,4", help="comma list of experiment ids")
    p.add_argument("--algos", default="spa-fast",
                   help=f"comma list from: {', '.join(metrics.ALGORITHM_NAMES)}")
    p.add_argument("--trials", type=int, default=25)
    p.add_argument("--grid", default=None, help="LO:HI or LO:HI:POINTS geometric grid")
    p.add_argument("--grid-points", type=int, default=metrics.DEFAULT_GRID_POINTS,
                   dest="grid_points")
    p.add_argument("--deltas", default=None, help="explicit comma list of noise levels")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--m", type=int, default=synth.PAPER_M)
    p.add_argument("--r", type=int, default=synth.PAPER_R)
    p.add_argument("--n-mix", type=int, default=synth.PAPER_N_MIX, dest="n_mix")
    p.add_argument("--jobs", type=int, default=_default_jobs(),
                   help="trial-level process parallelism (SEPNMF_JOBS)")
    p.add_argument("--bound-draws", type=int, default=10, dest="bound_draws",
                   help="basis draws for the predicted-noise summary (0 disables)")
    p.add_argument("--out-dir", required=True, dest="out_dir")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("outliers", help="outlier-tolerant extraction")
    p.add_argument("input")
    p.add_argument("-r", type=int, required=True)
    p.add_argument("-t", type=int, required=True, help="max number of outliers")
    p.add_argument("--selector", default="l2")
    p.add_argument("--qp-tol", type=float, default=None, dest="qp_tol")
    p.add_argument("--qp-max-iters", type=int, default=outliers.DEFAULT_QP_MAX_ITERS,
                   dest="qp_max_iters")
    p.add_argument("--strict", action="store_true",
                   help="exit 3 when the abundance solver does not converge")
    p.add_argument("--format", choices=("csv", "raw"), default=None)
    p.add_argument("--out", default=None, help="write a JSON report here")
    p.set_defaults(func=cmd_outliers)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidMatrixError, InvalidOptionsError) as exc:
        print(f"sepnmf: input error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"sepnmf: input error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RankDeficiencyError as exc:
        print(f"sepnmf: extraction failed: {exc}", file=sys.stderr)
        return EXIT_ALGORITHM
    except ConvergenceFailureError as exc:
        print(f"sepnmf: numerical kernel failed: {exc}", file=sys.stderr)
        return EXIT_ALGORITHM


if __name__ == "__main__":
    sys.exit(main())
