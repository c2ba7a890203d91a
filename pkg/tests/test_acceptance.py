"""Acceptance criteria, one test per criterion.

Each criterion is a plain function returning ``(passed, detail)`` so the
module can also be run directly (``python tests/test_acceptance.py``).
Under pytest the PASS/FAIL lines are printed in the terminal summary.
"""

import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from tcnmf import datagen, io
from tcnmf.baselines import BaselineConfig, factorize_baseline
from tcnmf.hq import SolverConfig, estimate_scale_nagy, factorize, coef_bound
from tcnmf.losses import g, hq_weight, verify_conjugacy
from tcnmf.matrix import make_rng, normalize_columns
from tcnmf.metrics import accuracy, nmi, rel_error
from tcnmf.suite import active_set_oracle
from tcnmf.wnls import WnlsProblem, solve_wnls

REPORT = []


@pytest.fixture(scope="module", autouse=True)
def _compiled():
    REPORT.append(f"[info] kernel compile/cache load before timing: {warm_kernels():.1f}s")

LINE_DIR = np.array([1.0, 0.2]) / math.hypot(1.0, 0.2)


def warm_kernels():
    """Compile (or load from cache) the numba kernels so timed criteria exclude JIT cost."""
    t0 = time.perf_counter()
    factorize(np.ones((3, 3)), SolverConfig(rank=1, max_outer=2, warmup=1))
    return time.perf_counter() - t0


def _angle(w):
    u = w[:, 0] / np.linalg.norm(w[:, 0])
    return math.degrees(math.acos(min(1.0, abs(float(u @ LINE_DIR)))))


def criterion_1():
    warm_kernels()
    t0 = time.perf_counter()
    tc, l2 = [], []
    for seed in range(10):
        v, _, _ = datagen.gen_line(datagen.SyntheticLineSpec(n_points=180, slope=0.2, n_outliers=80, seed=seed))
        w, _, _ = factorize(v, SolverConfig(rank=1, seed=seed))
        tc.append(_angle(w))
        w, _, _ = factorize_baseline(v, BaselineConfig("l2", rank=1, seed=seed))
        l2.append(_angle(w))
    elapsed = time.perf_counter() - t0
    tc_ok = sum(a <= 5.0 for a in tc)
    l2_off = sum(a > 5.0 for a in l2)
    ok = tc_ok >= 9 and l2_off >= 8 and elapsed <= 10.0
    return ok, (f"truncated-cauchy within 5 deg on {tc_ok}/10 (max {max(tc):.3g} deg); "
                f"l2 off by >5 deg on {l2_off}/10 (min {min(l2):.3g} deg); {elapsed:.1f}s")


def criterion_2():
    worst = -math.inf
    iters = 0
    for seed in range(20):
        v, _, _ = datagen.gen_lowrank(64, 64, 4, seed)
        spec = datagen.CorruptionSpec("salt-pepper", seed=seed + 500, p=0.2, high=float(v.max()))
        vc, _ = datagen.corrupt(v, spec)
        _, _, st = factorize(vc, SolverConfig(rank=4, seed=seed))
        rise = np.array(st.objective_trace) - np.array(st.objective_start)
        worst = max(worst, float(rise.max()))
        iters += st.outer_iter
    return worst <= 1e-8, f"max per-step increase {worst:.3g} over {iters} outer iterations (slack 1e-8)"


def criterion_3():
    warm_kernels()
    rng = make_rng(3)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        r = int(rng.integers(1, 4))
        m = int(rng.integers(r, 7))
        p = WnlsProblem(rng.random((m, r)), rng.random(m), rng.random(m) * 2 - 0.3, rng.random(r))
        # strict stopping rule (no 1e-3 relaxation); see README
        h, _ = solve_wnls(p, eps1=1e-6, floor=0.0, max_iter=5000)
        best, _ = active_set_oracle(p.w, p.d, p.v)
        worst = max(worst, abs(p.objective(h) - best))
    elapsed = time.perf_counter() - t0
    return worst <= 1e-6 and elapsed <= 5.0, f"max objective gap {worst:.3g} (tol 1e-6), {elapsed:.2f}s"


def criterion_4():
    rng = make_rng(4)
    rel = {}
    for gamma in (0.5, 2.0, 10.0):
        est = estimate_scale_nagy(gamma * rng.standard_cauchy(100_000), 1.0, tol=1e-10, max_iter=500)
        rel[gamma] = abs(est - gamma) / gamma
    fixed = max(abs(estimate_scale_nagy(np.full(100, g0), g0) - g0) for g0 in (0.25, 1.0, 7.5))
    ok = max(rel.values()) <= 0.1 and fixed <= 1e-12
    parts = ", ".join(f"gamma*={k}: {v:.2%}" for k, v in rel.items())
    return ok, f"relative errors {parts}; fixed-point drift {fixed:.3g}"


def criterion_5():
    worst, exact = 0.0, True
    for sigma in (1.0, 5.0):
        for x in np.linspace(0.0, 3 * sigma, 61):
            worst = max(worst, abs(verify_conjugacy(x, sigma) - (-g(x, sigma))))
            closed = 1.0 / (1.0 + x) if x <= sigma else 0.0
            exact &= hq_weight(x, sigma) == closed
    return worst <= 1e-4 and exact, f"max |grid sup - (-g)| {worst:.3g} (tol 1e-4); weights exact: {exact}"


def criterion_6():
    warm_kernels()
    t0 = time.perf_counter()
    means = {}
    for p in (0.3, 0.4):
        errs = {"tc": [], "l2": []}
        for seed in range(5):
            v, _, _ = datagen.gen_lowrank(256, 100, 5, seed)
            spec = datagen.CorruptionSpec("salt-pepper", seed=seed + 100, p=p, high=float(v.max()))
            vc, _ = datagen.corrupt(v, spec)
            w, h, _ = factorize(vc, SolverConfig(rank=5, seed=seed))
            errs["tc"].append(rel_error(v, w, h))
            w, h, _ = factorize_baseline(vc, BaselineConfig("l2", rank=5, seed=seed))
            errs["l2"].append(rel_error(v, w, h))
        means[p] = {k: float(np.mean(x)) for k, x in errs.items()}
    elapsed = time.perf_counter() - t0
    ratio_ok = all(m["tc"] <= 0.6 * m["l2"] for m in means.values())
    growth = means[0.4]["tc"] / means[0.3]["tc"] - 1.0
    ok = ratio_ok and growth < 0.5 and elapsed <= 180.0
    detail = "; ".join(f"p={p}: tc {m['tc']:.4f} vs l2 {m['l2']:.4f}" for p, m in means.items())
    return ok, f"{detail}; tc growth 30->40% {growth:+.1%} (< +50%); {elapsed:.0f}s"


def criterion_7():
    worst = -math.inf
    cols = 0
    for seed in range(20):
        v, _, _ = datagen.gen_lowrank(40, 30, 3, seed)
        spec = datagen.CorruptionSpec("salt-pepper", seed=seed + 700, p=0.2, high=float(v.max()))
        vc, _ = datagen.corrupt(v, spec)
        sigma, gamma = 4.0, 0.5
        w, h, _ = factorize(vc, SolverConfig(rank=3, seed=seed, scale_mode="fixed", gamma=gamma,
                                             truncation_mode="explicit", sigma=sigma, max_outer=50))
        _, scales = normalize_columns(w)
        hn = h * scales[:, None]
        alpha = np.linalg.norm(vc, axis=0)
        worst = max(worst, float(np.max(np.linalg.norm(hn, axis=0) - coef_bound(alpha, sigma, gamma))))
        cols += h.shape[1]
    return worst <= 0.0, f"{cols} columns, max ||h|| - bound = {worst:.3g} (must be <= 0)"


def _cli(args, threads, cwd):
    env = dict(os.environ, RNMF_THREADS=str(threads))
    env.pop("NUMBA_NUM_THREADS", None)
    res = subprocess.run([sys.executable, "-m", "tcnmf", *map(str, args)], env=env, cwd=cwd,
                         capture_output=True, text=True)
    if res.returncode != 0:
        raise RuntimeError(res.stderr)


def criterion_8(tmp):
    tmp = Path(tmp)
    _cli(["synth", "lowrank", "--m", 80, "--n", 70, "--rank", 4, "--seed", 8, "--out", tmp / "d"], 1, tmp)
    v = io.read_matrix(tmp / "d" / "V.csv")
    _cli(["corrupt", "--input", tmp / "d" / "V.csv", "--kind", "salt-pepper", "--p", 0.3,
          "--high", float(v.max()), "--seed", 9, "--out", tmp / "c"], 1, tmp)
    same = []
    for method in ("truncated-cauchy", "huber"):
        outs = []
        for threads in (1, 4):
            out = tmp / f"{method}-{threads}"
            _cli(["factorize", "--input", tmp / "c" / "V.csv", "--rank", 4, "--method", method,
                  "--seed", 5, "--max-outer", 60, "--out", out], threads, tmp)
            outs.append(((out / "W.csv").read_bytes(), (out / "H.csv").read_bytes()))
        same.append(outs[0] == outs[1])
    return all(same), f"W.csv/H.csv identical for RNMF_THREADS=1 vs 4: tc {same[0]}, huber {same[1]}"


def criterion_9():
    rng = make_rng(9)
    k = 5
    truth = rng.integers(0, k, 1000)
    ident = accuracy(truth, truth) == 1.0 and nmi(truth, truth) == 1.0
    pred = np.where(rng.random(1000) < 0.7, truth, rng.integers(0, k, 1000))
    a0, n0 = accuracy(pred, truth), nmi(pred, truth)
    drift = 0.0
    for _ in range(100):
        perm = rng.permutation(k)
        drift = max(drift, abs(accuracy(perm[pred], truth) - a0), abs(nmi(perm[pred], truth) - n0))
    n = 10_000
    t = rng.permutation(np.arange(n) % k)
    shuffled = accuracy(t, rng.permutation(t))
    ok = ident and drift <= 1e-12 and abs(shuffled - 1 / k) <= 0.05
    return ok, (f"identical -> 1.0: {ident}; max change over 100 relabelings {drift:.3g}; "
                f"shuffled-truth accuracy {shuffled:.4f} vs 1/k = {1 / k:.2f}")


def _check(number, title, fn, *args):
    passed, detail = fn(*args)
    REPORT.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number} {title}: {detail}")
    assert passed, detail


def test_criterion_1_line_subspace_recovery():
    _check(1, "subspace recovery with 80/180 outliers", criterion_1)


def test_criterion_2_hq_descent():
    _check(2, "per-step descent", criterion_2)


def test_criterion_3_wnls_oracle():
    _check(3, "WNLS vs active-set oracle", criterion_3)


def test_criterion_4_nagy():
    _check(4, "Cauchy scale estimation", criterion_4)


def test_criterion_5_conjugacy():
    _check(5, "conjugate pair and weight maximiser", criterion_5)


def test_criterion_6_corruption_trend():
    _check(6, "salt-and-pepper robustness trend", criterion_6)


def test_criterion_7_representation_bound():
    _check(7, "coefficient norm bound", criterion_7)


def test_criterion_8_thread_determinism(tmp_path):
    _check(8, "bitwise determinism across thread counts", criterion_8, tmp_path)


def test_criterion_9_metric_sanity():
    _check(9, "metric sanity", criterion_9)


if __name__ == "__main__":
    import tempfile

    fns = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
           criterion_7, None, criterion_9]
    for i, fn in enumerate(fns, 1):
        if fn is None:
            with tempfile.TemporaryDirectory() as d:
                passed, detail = criterion_8(d)
        else:
            passed, detail = fn()
        print(f"[{'PASS' if passed else 'FAIL'}] criterion {i}: {detail}", flush=True)
