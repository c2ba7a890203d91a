"""Command-line front end: ``tcnmf {synth,corrupt,factorize,eval,bench}``.

Matrices move between subcommands as header-less CSV files, one matrix
row per line. Every subcommand writes into an output directory (``--out``)
and exits non-zero if anything it was asked to write is missing.
"""

import argparse
import csv
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import datagen, io, metrics
from .baselines import BaselineConfig, factorize_baseline
from .hq import SCALE_MODES, TRUNCATION_MODES, SolverConfig, factorize
from .matrix import make_rng

METHODS = ("truncated-cauchy", "cauchy", "l2", "l1", "l21", "huber", "cim")


# --- shared pipeline pieces -------------------------------------------------

def solver_config(method, rank, **kw):
    """Resolve the full solver config for ``method`` from optional overrides (None = default)."""
    kw = {k: v for k, v in kw.items() if v is not None}
    if method == "truncated-cauchy":
        return SolverConfig(rank=rank, **kw)
    keep = {"eps1", "eps2", "max_outer", "max_inner", "seed", "gamma", "inner_floor", "warmup"}
    return BaselineConfig(method=method, rank=rank, **{k: v for k, v in kw.items() if k in keep})


def fit(v, method, cfg):
    """Run one factorization; returns ``(w, h, trace_rows, meta)``."""
    if method == "truncated-cauchy":
        w, h, st = factorize(v, cfg)
        rows = [(t + 1, f, f0, g, n) for t, (f, f0, g, n) in enumerate(
            zip(st.objective_trace, st.objective_start, st.gamma_trace, st.outlier_trace))]
        meta = {"termination": st.termination, "runtime": st.runtime,
                "outer_iterations": st.outer_iter, "gamma": st.gamma,
                "threshold": st.threshold, "gamma_min": st.gamma_min,
                "warmup_iterations": st.warmup_iters}
    else:
        w, h, tr = factorize_baseline(v, cfg)
        rows = [(t + 1, f, f0, p.get("gamma", math.nan), 0) for t, (f, f0, p) in enumerate(
            zip(tr.objective_trace, tr.objective_start, tr.params))]
        meta = {"termination": tr.termination, "runtime": tr.runtime,
                "outer_iterations": tr.outer_iter}
    return w, h, rows, meta


def _load_input(args):
    """Exactly one of --input (CSV) / --pgm-dir. Returns ``(v, image_shape or None)``."""
    if bool(args.input) == bool(args.pgm_dir):
        raise ValueError("give exactly one of --input CSV or --pgm-dir DIR")
    if args.input:
        return io.read_matrix(args.input), None
    v, shape, _ = io.read_pgm_dir(args.pgm_dir)
    return v, shape


def _check_written(paths):
    missing = [str(p) for p in paths if not Path(p).is_file()]
    if missing:
        raise OSError(f"outputs not written: {', '.join(missing)}")


# --- subcommands -------------------------------------------------------------

def cmd_synth(args):
    out = Path(args.out)
    labels = None
    if args.kind == "line":
        spec = datagen.SyntheticLineSpec(n_points=args.n, slope=args.slope, n_outliers=args.outliers,
                                         outlier_axis=args.axis, seed=args.seed)
        v, clean, idx = datagen.gen_line(spec)
    elif args.kind == "lowrank":
        v, _, _ = datagen.gen_lowrank(args.m, args.n, args.rank, args.seed)
        clean, idx = v, np.zeros(0, dtype=int)
    else:
        v, _, _, labels = datagen.gen_clustered(args.m, args.n, args.k, args.seed)
        clean, idx = v, np.zeros(0, dtype=int)
    files = [out / "V.csv", out / "clean.csv", out / "outliers.csv"]
    io.write_matrix(files[0], v)
    io.write_matrix(files[1], clean)
    io.write_indices(files[2], idx)
    if labels is not None:
        files.append(out / "labels.csv")
        io.write_indices(files[-1], labels)
    return files


def cmd_corrupt(args):
    v, shape = _load_input(args)
    if args.image_shape:
        shape = io.parse_shape(args.image_shape)
    if args.kind == "block" and shape is None:
        raise ValueError("block corruption needs --image-shape HxW (or --pgm-dir input)")
    spec = datagen.CorruptionSpec(kind=args.kind, seed=args.seed, delta=args.delta, p=args.p,
                                  low=args.low, high=args.high, b=args.b, fill=args.fill)
    vc, mask = datagen.corrupt(v, spec, image_shape=shape)
    out = Path(args.out)
    files = [out / "V.csv", out / "mask.csv"]
    io.write_matrix(files[0], vc)
    io.write_mask(files[1], mask)
    if args.pgm_dir:
        files.append(out / "clean.csv")
        io.write_matrix(files[-1], v)
    return files


def cmd_factorize(args):
    v, _ = _load_input(args)
    cfg = solver_config(args.method, args.rank, eps1=args.eps1, eps2=args.eps2,
                        max_outer=args.max_outer, max_inner=args.max_inner, seed=args.seed,
                        gamma=args.gamma, warmup=args.warmup, scale_mode=args.scale_mode,
                        truncation_mode=args.truncation, sigma=args.sigma, burn_in=args.burn_in)
    w, h, rows, meta = fit(v, args.method, cfg)
    out = Path(args.out)
    files = [out / "W.csv", out / "H.csv", out / "trace.csv", out / "meta.json"]
    io.write_matrix(files[0], w)
    io.write_matrix(files[1], h)
    with open(io._ensure_parent(files[2]), "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["iteration", "objective", "objective_start", "gamma", "n_outliers"])
        for t, f, f0, g, n in rows:
            wr.writerow([t, format(f, ".17g"), format(f0, ".17g"), format(g, ".17g"), n])
    meta = {"method": args.method, "config": cfg.to_dict(), "input_shape": list(v.shape), **meta}
    if args.clean:
        meta["rel_error"] = metrics.rel_error(io.read_matrix(args.clean), w, h)
    io.write_json(files[3], meta)
    return files


def cmd_eval(args):
    h = io.read_matrix(args.h)
    truth = io.read_labels(args.labels)
    if truth.size != h.shape[1]:
        raise ValueError(f"{args.labels} has {truth.size} labels but H has {h.shape[1]} columns")
    clean = io.read_matrix(args.clean) if args.clean else None
    w = io.read_matrix(args.w) if args.w else None
    report = metrics.evaluate(h, truth, k=args.k, trials=args.trials, restarts=args.restarts,
                              seed=args.seed, v_clean=clean, w=w)
    path = Path(args.out)
    io.write_json(path, report.to_dict())
    return [path]


BENCH_FIELDS = ["method", "kind", "level", "trial", "accuracy", "nmi", "rel_error", "runtime",
                "termination", "error"]


def bench_rows(v_clean, labels, methods, kind, levels, trials, rank, seed, image_shape=None,
               high=None, max_outer=None, k_restarts=10):
    """Yield one result dict per (level, trial, method) in grid order.

    The corruption for a (level, trial) cell is shared by every method, so
    methods are compared on identical data. Failures are recorded in the row.
    """
    high = float(v_clean.max()) if high is None else high
    k = np.unique(labels).size if labels is not None else None
    for li, level in enumerate(levels):
        for trial in range(trials):
            cell_seed = int(make_rng(seed, li * 100003 + trial).integers(2**62))
            kw = {"laplace": {"delta": level}, "salt-pepper": {"p": level, "high": high},
                  "block": {"b": int(level)}}[kind]
            spec = datagen.CorruptionSpec(kind=kind, seed=cell_seed, **kw)
            try:
                vc, _ = datagen.corrupt(v_clean, spec, image_shape=image_shape)
            except ValueError as exc:
                for m in methods:
                    yield _fail_row(m, kind, level, trial, exc)
                continue
            for m in methods:
                t0 = time.perf_counter()
                try:
                    cfg = solver_config(m, rank, seed=cell_seed, max_outer=max_outer)
                    w, h, _, _ = fit(vc, m, cfg)
                    row = {"method": m, "kind": kind, "level": level, "trial": trial,
                           "rel_error": metrics.rel_error(v_clean, w, h),
                           "accuracy": math.nan, "nmi": math.nan, "termination": "", "error": ""}
                    if k is not None:
                        pred = metrics.kmeans(h, k, restarts=k_restarts, seed=cell_seed)
                        row["accuracy"] = metrics.accuracy(pred, labels)
                        row["nmi"] = metrics.nmi(pred, labels)
                except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
                    row = _fail_row(m, kind, level, trial, exc)
                row["runtime"] = time.perf_counter() - t0
                yield row


def _fail_row(method, kind, level, trial, exc):
    return {"method": method, "kind": kind, "level": level, "trial": trial, "accuracy": math.nan,
            "nmi": math.nan, "rel_error": math.nan, "runtime": 0.0, "termination": "failed",
            "error": f"{type(exc).__name__}: {exc}"}


def cmd_bench(args):
    out = Path(args.out)
    if args.suite:
        from .suite import run_suite
        summary = run_suite(seed=args.seed, scale=args.scale)
        path = out / "suite.json"
        io.write_json(path, summary)
        print(f"{summary['passed']}/{summary['total']} properties passed")
        return [path]
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise ValueError(f"unknown method(s) {bad}; choose from {METHODS}")
    levels = [float(x) for x in args.levels.split(",") if x.strip()]
    if not levels or args.trials < 1:
        raise ValueError("need at least one level and one trial")
    image_shape = io.parse_shape(args.image_shape) if args.image_shape else None
    if args.input or args.pgm_dir:
        v, shape = _load_input(args)
        image_shape = image_shape or shape
        labels = io.read_labels(args.labels) if args.labels else None
    else:
        v, _, _, labels = datagen.gen_clustered(args.m, args.n, args.k, args.seed)
    if args.kind == "block" and image_shape is None:
        raise ValueError("block corruption needs --image-shape HxW")
    path = out / "bench.csv"
    with open(io._ensure_parent(path), "w", newline="", encoding="utf-8") as fh:
        wr = csv.DictWriter(fh, fieldnames=BENCH_FIELDS, lineterminator="\n")
        wr.writeheader()
        for row in bench_rows(v, labels, methods, args.kind, levels, args.trials, args.rank,
                              args.seed, image_shape=image_shape, max_outer=args.max_outer):
            wr.writerow({k: (format(x, ".10g") if isinstance(x, float) else x) for k, x in row.items()})
            fh.flush()
    return [path]


# --- argument parsing --------------------------------------------------------

def _add_input(p):
    p.add_argument("--input", help="matrix CSV")
    p.add_argument("--pgm-dir", help="directory of PGM images, one column per image")


def build_parser():
    ap = argparse.ArgumentParser(prog="tcnmf", description="Truncated Cauchy NMF toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="generate synthetic data")
    sp.add_argument("kind", choices=("line", "lowrank", "clusters"))
    sp.add_argument("--n", type=int, default=180, help="points / columns")
    sp.add_argument("--m", type=int, default=50, help="rows (lowrank, clusters)")
    sp.add_argument("--rank", type=int, default=5)
    sp.add_argument("--k", type=int, default=5, help="clusters")
    sp.add_argument("--slope", type=float, default=0.2)
    sp.add_argument("--outliers", type=int, default=0)
    sp.add_argument("--axis", choices=("x", "y", "both"), default="both")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=".")
    sp.set_defaults(func=cmd_synth)

    cp = sub.add_parser("corrupt", help="corrupt every column of a matrix")
    _add_input(cp)
    cp.add_argument("--kind", choices=datagen.CORRUPTION_KINDS, required=True)
    cp.add_argument("--p", type=float, help="salt-pepper fraction per column")
    cp.add_argument("--delta", type=float, help="laplace scale")
    cp.add_argument("--b", type=int, help="block side")
    cp.add_argument("--fill", type=float, default=550.0)
    cp.add_argument("--low", type=float, default=0.0)
    cp.add_argument("--high", type=float, default=255.0)
    cp.add_argument("--image-shape", help="HxW, needed for block corruption of CSV input")
    cp.add_argument("--seed", type=int, default=0)
    cp.add_argument("--out", default=".")
    cp.set_defaults(func=cmd_corrupt)

    fp = sub.add_parser("factorize", help="fit an NMF model")
    _add_input(fp)
    fp.add_argument("--method", choices=METHODS, default="truncated-cauchy")
    fp.add_argument("--rank", type=int, required=True)
    fp.add_argument("--seed", type=int, default=0)
    fp.add_argument("--eps1", type=float)
    fp.add_argument("--eps2", type=float)
    fp.add_argument("--max-outer", type=int)
    fp.add_argument("--max-inner", type=int)
    fp.add_argument("--warmup", type=int)
    fp.add_argument("--gamma", type=float, help="fixed scale (scale-mode fixed, cauchy)")
    fp.add_argument("--scale-mode", choices=SCALE_MODES)
    fp.add_argument("--truncation", choices=TRUNCATION_MODES)
    fp.add_argument("--sigma", type=float, help="explicit truncation level")
    fp.add_argument("--burn-in", type=int)
    fp.add_argument("--clean", help="clean matrix CSV; adds rel_error to meta.json")
    fp.add_argument("--out", default=".")
    fp.set_defaults(func=cmd_factorize)

    ep = sub.add_parser("eval", help="cluster H and score against labels")
    ep.add_argument("--h", required=True, help="H.csv")
    ep.add_argument("--labels", required=True)
    ep.add_argument("--k", type=int)
    ep.add_argument("--trials", type=int, default=10)
    ep.add_argument("--restarts", type=int, default=10)
    ep.add_argument("--seed", type=int, default=0)
    ep.add_argument("--clean", help="clean matrix CSV (with --w) for rel_error")
    ep.add_argument("--w", help="W.csv")
    ep.add_argument("--out", default="report.json")
    ep.set_defaults(func=cmd_eval)

    bp = sub.add_parser("bench", help="sweep corruption levels x methods, or run the property suite")
    _add_input(bp)
    bp.add_argument("--labels")
    bp.add_argument("--suite", action="store_true", help="run the property suite instead")
    bp.add_argument("--scale", choices=("quick", "full"), default="quick")
    bp.add_argument("--methods", default="l2,truncated-cauchy")
    bp.add_argument("--kind", choices=datagen.CORRUPTION_KINDS, default="salt-pepper")
    bp.add_argument("--levels", default="0.1,0.3,0.5")
    bp.add_argument("--trials", type=int, default=2)
    bp.add_argument("--m", type=int, default=64)
    bp.add_argument("--n", type=int, default=60)
    bp.add_argument("--k", type=int, default=3)
    bp.add_argument("--rank", type=int, default=3)
    bp.add_argument("--max-outer", type=int)
    bp.add_argument("--image-shape")
    bp.add_argument("--seed", type=int, default=0)
    bp.add_argument("--out", default=".")
    bp.set_defaults(func=cmd_bench)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        files = args.func(args)
        _check_written(files)
    except (ValueError, OSError) as exc:
        print(f"tcnmf {args.command}: error: {exc}", file=sys.stderr)
        return 1
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
