"""Command-line surface: generate, tune, score, evaluate, bench.

Exit codes: 0 success, 1 runtime/IO failure, 2 usage error. Every command
is deterministic given its seed flags (and any thread count).
"""

from __future__ import annotations

import argparse
import math
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import datagen
from .core import Dataset, TuningGrid, load_model, save_model
from .dataio import read_points_csv, write_points_csv
from .datagen import LabeledSet
from .errors import InvalidGrid, LoftuneError
from .evaluation import evaluate_model, grid_performance, novelty_scores, write_report
from .projection import make_projection, project
from .tuner import tune, write_diagnostics

GENERATORS = ("polygons", "balls", "spheres", "cubes")


def _parse_k_spec(spec: str) -> tuple[int, ...]:
    """`lo:hi[:step]`, inclusive, or a comma list."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"bad k range {spec!r}, expected lo:hi[:step]")
        lo, hi = int(parts[0]), int(parts[1])
        step = int(parts[2]) if len(parts) == 3 else 1
        if step < 1 or hi < lo:
            raise ValueError(f"bad k range {spec!r}")
        return tuple(range(lo, hi + 1, step))
    return tuple(int(tok) for tok in spec.split(","))


def _parse_c_spec(spec: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in spec.split(","))


def _grid_from_args(args: argparse.Namespace) -> TuningGrid:
    return TuningGrid(contaminations=_parse_c_spec(args.c),
                      neighborhood_sizes=_parse_k_spec(args.k))


def _generate_set(name: str, seed: int, args: argparse.Namespace
                  ) -> tuple[Dataset, LabeledSet]:
    if name == "polygons":
        return datagen.gen_polygons(seed)
    if name == "balls":
        return datagen.gen_balls(seed)
    kwargs = dict(dim=args.dim, n_train=args.n_train, n_valid=args.n_valid,
                  p_out=args.p_out)
    if name == "spheres":
        return datagen.gen_hypersphere_mixture(seed, **kwargs)
    return datagen.gen_hypercube_mixture(seed, **kwargs)


def cmd_generate(args: argparse.Namespace) -> int:
    train, valid = _generate_set(args.set, args.seed, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_points_csv(out / "train.csv", train)
    write_points_csv(out / "validation.csv", valid.data, valid.labels)
    print(f"train: {train.n} rows x {train.p} columns -> {out / 'train.csv'}")
    print(f"validation: {valid.data.n} rows, anomaly fraction "
          f"{valid.anomaly_fraction:.4f} -> {out / 'validation.csv'}")
    return 0


def cmd_tune(args: argparse.Namespace) -> int:
    grid = _grid_from_args(args)
    data = read_points_csv(args.train)
    spec = None
    if args.project_dim is not None:
        spec = make_projection(data.p, args.project_dim, args.project_seed)
        data = project(data, spec)
    started = time.perf_counter()
    model = tune(data, grid, projection=spec, threads=args.threads)
    elapsed = time.perf_counter() - started
    save_model(model, args.out)
    if args.diagnostics:
        write_diagnostics(model.score_table, args.diagnostics)
    print(f"selected c_opt={model.c_opt} k_opt={model.k_opt} "
          f"threshold={model.threshold:.6f}")
    print("c\tm\tdf\tncp\tT(k_opt)\tquantile\tk_opt")
    for row in model.score_table.per_c:
        print(f"{row.c}\t{row.m}\t{row.df:.0f}\t{row.ncp:.4f}\t"
              f"{row.t_at_k_opt:.4f}\t{row.quantile:.6f}\t{row.k_opt}")
    print(f"tuned {data.n} points ({len(grid.contaminations)}x"
          f"{len(grid.neighborhood_sizes)} grid) in {elapsed:.2f}s")
    print(f"model written to {args.out}")
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    data = read_points_csv(args.input)
    scores = novelty_scores(model, data, threads=args.threads)
    predictions = (scores >= model.threshold).astype(int)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("score,prediction\n")
        for s, lab in zip(scores, predictions):
            fh.write(f"{float(s)!r},{int(lab)}\n")
    print(f"scored {data.n} rows -> {args.out} "
          f"({int(predictions.sum())} predicted anomalies)")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    labeled = read_points_csv(args.validation, want_labels=True)
    report = evaluate_model(model, labeled.data, labeled.labels,
                            threads=args.threads)
    print(report)
    if args.out:
        write_report(report, args.out)
        print(f"report written to {args.out}")
    return 0


def _bench_one(suite: str, rep: int, args: argparse.Namespace) -> dict:
    seed = args.seed + rep
    gen = (datagen.gen_hypersphere_mixture if suite == "spheres"
           else datagen.gen_hypercube_mixture)
    train, valid = gen(seed, dim=args.dim, n_train=args.n_train,
                       n_valid=args.n_valid, p_out=args.p_out)
    spec = make_projection(args.dim, args.project_dim, seed)
    train_p = project(train, spec)
    valid_p = project(valid.data, spec)
    grid = TuningGrid(contaminations=_parse_c_spec(args.c),
                      neighborhood_sizes=_parse_k_spec(args.k))
    started = time.perf_counter()
    model = tune(train_p, grid)
    tune_seconds = time.perf_counter() - started
    perf = grid_performance(train_p, grid, valid_p, valid.labels)
    return {
        "f1_tuned": perf.f1_at(model.c_opt, model.k_opt),
        "f1_best": perf.best_f1(),
        "auc_tuned": perf.auc_at(model.k_opt),
        "auc_best": perf.best_auc(),
        "seconds": tune_seconds,
    }


def _mean_se(values: list[float]) -> str:
    mean = statistics.fmean(values)
    if len(values) < 2:
        return f"{mean:.3f} (-)"
    se = statistics.stdev(values) / math.sqrt(len(values))
    return f"{mean:.3f} ({se:.3f})"


def cmd_bench(args: argparse.Namespace) -> int:
    suites = ["spheres", "cubes"] if args.suite == "both" else [args.suite]
    header = (f"{'data':<10} {'F1 tuned':>14} {'F1 best':>14} "
              f"{'AUC tuned':>14} {'AUC best':>14} {'mean tune (s)':>14}")
    print(f"benchmark: {args.reps} reps, n_train={args.n_train}, "
          f"dim {args.dim} -> {args.project_dim}, grid c={args.c} k={args.k}")
    print(header)
    for suite in suites:
        if args.threads > 1:
            with ThreadPoolExecutor(max_workers=args.threads) as pool:
                results = list(pool.map(
                    lambda r: _bench_one(suite, r, args), range(args.reps)))
        else:
            results = [_bench_one(suite, r, args) for r in range(args.reps)]
        cols = [
            _mean_se([r["f1_tuned"] for r in results]),
            _mean_se([r["f1_best"] for r in results]),
            _mean_se([r["auc_tuned"] for r in results]),
            _mean_se([r["auc_best"] for r in results]),
            f"{statistics.fmean([r['seconds'] for r in results]):.2f}",
        ]
        print(f"{suite:<10} " + " ".join(f"{c:>14}" for c in cols))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loftune",
        description="LOF anomaly detection with automatic (c, k) tuning")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic benchmark to CSV")
    p.add_argument("--set", required=True, choices=GENERATORS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dim", type=int, default=100, help="mixture dimension")
    p.add_argument("--n-train", type=int, default=100_000)
    p.add_argument("--n-valid", type=int, default=10_000)
    p.add_argument("--p-out", type=float, default=0.05)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("tune", help="select (c, k) on a training CSV")
    p.add_argument("--train", required=True)
    p.add_argument("--c", required=True, help="comma list, e.g. 0.006,0.008,0.01")
    p.add_argument("--k", required=True, help="lo:hi[:step] or comma list")
    p.add_argument("--out", required=True, help="model file path")
    p.add_argument("--diagnostics", help="write the (c,k) table here (TSV)")
    p.add_argument("--project-dim", type=int)
    p.add_argument("--project-seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("score", help="novelty-score a feature CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("evaluate", help="score a labeled CSV and report metrics")
    p.add_argument("--model", required=True)
    p.add_argument("--validation", required=True)
    p.add_argument("--out", help="write the one-record TSV report here")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="repeat generate/project/tune/evaluate")
    p.add_argument("--suite", choices=("spheres", "cubes", "both"), default="both")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=100)
    p.add_argument("--n-train", type=int, default=10_000)
    p.add_argument("--n-valid", type=int, default=10_000)
    p.add_argument("--p-out", type=float, default=0.05)
    p.add_argument("--project-dim", type=int, default=3)
    p.add_argument("--c", default="0.006,0.008,0.01")
    p.add_argument("--k", default="10:50")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, InvalidGrid) as exc:  # malformed grid/flag values
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except LoftuneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
