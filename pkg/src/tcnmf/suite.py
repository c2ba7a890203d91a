"""Executable property battery covering every module.

``run_suite(seed, scale)`` runs each property on freshly generated
instances and returns a JSON-ready summary. Failures are data: a
property that raises is recorded as failed with the exception text.

Every property is deterministic per seed except ``hq.complexity`` which
measures wall time; its record carries ``"timing": True``.
"""

import itertools
import math
import tempfile
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import _kernels, datagen, io, losses, metrics
from .baselines import BaselineConfig, factorize_baseline
from .hq import (SolverConfig, estimate_scale_nagy, factorize,
                 coef_bound, update_weights)
from .matrix import make_rng, matmul, normalize_columns, project_nonneg, spectral_norm
from .wnls import WnlsProblem, solve_wnls, wnls_gradient

SCALES = {
    # m, n caps, rank cap, repetitions per property, Monte Carlo sample size
    "quick": {"m": 64, "n": 64, "r": 4, "reps": 5, "mc": 100_000, "line_seeds": 3},
    "full": {"m": 512, "n": 512, "r": 16, "reps": 20, "mc": 100_000, "line_seeds": 10},
}


@dataclass
class OracleResult:
    instance: str
    oracle: float
    solver: float
    discrepancy: float
    tolerance: float
    passed: bool = None

    def __post_init__(self):
        if self.passed is None:
            self.passed = bool(self.discrepancy <= self.tolerance)


def _res(instance, oracle, solver, tolerance, discrepancy=None):
    oracle, solver = float(oracle), float(solver)
    if discrepancy is None:
        discrepancy = abs(oracle - solver)
    return OracleResult(str(instance), oracle, solver, float(discrepancy), float(tolerance))


def _flag(instance, ok, tolerance=0.0):
    """Boolean property as an oracle record: discrepancy 0 when it holds, 1 otherwise."""
    return OracleResult(str(instance), 1.0, 1.0 if ok else 0.0, 0.0 if ok else 1.0, tolerance)


# --- shared oracles ----------------------------------------------------------

def active_set_oracle(w, d, v):
    """Exact WNLS minimum by enumerating supports. Returns ``(objective, h)``."""
    w, d, v = (np.asarray(a, dtype=np.float64) for a in (w, d, v))
    r = w.shape[1]
    a = w.T @ (d[:, None] * w)
    b = w.T @ (d * v)
    best_h = np.zeros(r)
    best = 0.5 * float(np.sum(d * v * v))
    for k in range(1, r + 1):
        for support in itertools.combinations(range(r), k):
            s = list(support)
            z = np.linalg.lstsq(a[np.ix_(s, s)], b[s], rcond=None)[0]
            if np.all(z >= 0):
                h = np.zeros(r)
                h[s] = z
                f = 0.5 * float(np.sum(d * (v - w @ h) ** 2))
                if f < best:
                    best, best_h = f, h
    return best, best_h


def _planted(rng, m, n, r, p):
    v = rng.random((m, r)) @ rng.random((r, n))
    spec = datagen.CorruptionSpec("salt-pepper", seed=int(rng.integers(2**31)), p=p, high=float(v.max()))
    return v, datagen.corrupt(v, spec)[0]


def weight_consistency(e, q, info):
    """Max deviation of ``q`` from the HQ weight of ``e`` with outlier overrides."""
    gamma, thr = info["gamma"], info["threshold"]
    expected = losses.hq_weight((np.asarray(e) / gamma) ** 2)
    expected = np.where(np.abs(e) > thr, 0.0, expected)
    return float(np.max(np.abs(np.asarray(q) - expected)))


# --- matrix-core -------------------------------------------------------------

def p_matmul_assoc(rng, sc):
    out = []
    for i in range(sc["reps"]):
        m, k, l, n = rng.integers(2, sc["m"] + 1, 4)
        a, b, c = rng.random((m, k)) + 1, rng.random((k, l)) + 1, rng.random((l, n)) + 1
        left, right = matmul(matmul(a, b), c), matmul(a, matmul(b, c))
        out.append(_res(i, 0.0, 0.0, 1e-10, float(np.max(np.abs(left - right) / np.abs(right)))))
    return out


def p_project_idempotent(rng, sc):
    out = []
    for i in range(sc["reps"]):
        a = rng.standard_normal((sc["m"], sc["n"]))
        once = project_nonneg(a)
        out.append(_flag(i, np.array_equal(project_nonneg(once), once) and np.all(once >= 0)))
    return out


def p_spectral_bound(rng, sc):
    out = []
    for i in range(sc["reps"]):
        b = rng.standard_normal((sc["m"], sc["r"] + 2))
        a = b.T @ b
        lam = spectral_norm(a)
        x = rng.standard_normal((a.shape[0], 100))
        ratios = np.linalg.norm(a @ x, axis=0) / np.linalg.norm(x, axis=0)
        tol = 1e-6 * lam
        out.append(_res(i, lam, ratios.max(), tol, max(0.0, ratios.max() - lam)))
    return out


def p_rng_determinism(rng, sc):
    s = int(rng.integers(2**63))
    a = make_rng(s).random(1000).tobytes()
    b = make_rng(s).random(1000).tobytes()
    c = make_rng(s, 1).random(1000).tobytes()
    return [_flag("same-seed", a == b), _flag("child-stream-differs", a != c)]


# --- losses ------------------------------------------------------------------

def p_hq_weight_inverse(rng, sc):
    out = []
    for sigma in (1.0, 5.0, 100.0):
        x = np.linspace(0.0, sigma, 1000)
        dev = float(np.max(np.abs(losses.hq_weight(x, sigma) * (1.0 + x) - 1.0)))
        # one rounding of the product
        out.append(_res(f"sigma={sigma}", 1.0, 1.0 + dev, np.finfo(float).eps, dev))
    return out


def p_g_monotone_concave(rng, sc):
    out = []
    for sigma in (1.0, 5.0):
        x = np.sort(rng.uniform(0, sigma, 2000))
        gx = losses.g(x, sigma)
        mono = float(max(0.0, -np.min(np.diff(gx))))
        x1, x2 = rng.uniform(0, sigma, 1000), rng.uniform(0, sigma, 1000)
        mid = losses.g((x1 + x2) / 2, sigma) - (losses.g(x1, sigma) + losses.g(x2, sigma)) / 2
        out.append(_res(f"monotone sigma={sigma}", 0.0, mono, 0.0))
        out.append(_res(f"concave sigma={sigma}", 0.0, 0.0, 1e-12, max(0.0, -float(mid.min()))))
    return out


def p_truncated_unbounded(rng, sc):
    e = np.linspace(-50, 50, 2001)
    out = []
    for gamma in (0.3, 1.0, 7.0):
        a = losses.baseline_weight(e, losses.WeightFunction("truncated-cauchy", gamma=gamma))
        b = losses.baseline_weight(e, losses.WeightFunction("cauchy", gamma=gamma))
        out.append(_flag(f"gamma={gamma}", np.array_equal(a, b)))
    return out


def _weight_fns():
    return [losses.WeightFunction("l1"), losses.WeightFunction("l21-column"),
            losses.WeightFunction("huber", c=1.3), losses.WeightFunction("cim", width=2.0),
            losses.WeightFunction("cauchy", gamma=0.7),
            losses.WeightFunction("truncated-cauchy", gamma=0.7, sigma=4.0),
            losses.WeightFunction("l2")]


def p_weight_monotone(rng, sc):
    e = np.linspace(0, 40, 4001)
    out = []
    for fn in _weight_fns():
        if fn.kind == "l2":
            continue
        wts = losses.baseline_weight(e, fn)
        out.append(_res(fn.kind, 0.0, 0.0, 0.0, max(0.0, float(np.max(np.diff(wts))))))
    return out


def p_weight_range(rng, sc):
    e = np.concatenate([np.linspace(-40, 40, 4001), rng.standard_cauchy(2000)])
    out = []
    for fn in _weight_fns():
        wts = losses.baseline_weight(e, fn)
        out.append(_flag(fn.kind, bool(np.all((wts >= 0) & (wts <= 1)))))
    return out


def p_conjugacy(rng, sc):
    out = []
    ys = np.linspace(-1.0, 0.0, 200001)
    for sigma in (1.0, 5.0):
        fstar = losses.conjugate(ys, sigma)
        for x in np.linspace(0, 3 * sigma, 13):
            best = losses.verify_conjugacy(x, sigma)
            out.append(_res(f"sigma={sigma} x={x:.3g}", -losses.g(x, sigma), best, 1e-4))
            closed = -1.0 / (1.0 + x) if x <= sigma else 0.0
            out.append(_res(f"weight sigma={sigma} x={x:.3g}", closed,
                            -losses.hq_weight(x, sigma), 0.0))
            if x != sigma:  # at x = sigma both branches tie
                vals = np.where(np.isfinite(fstar), ys * x - fstar, -np.inf)
                y_grid = ys[int(np.argmax(vals))]
                out.append(_res(f"grid argmax sigma={sigma} x={x:.3g}", closed, y_grid, 1e-3))
    return out


# --- wnls-solver -------------------------------------------------------------

def _wnls_instance(rng, r_max, m_max):
    r = int(rng.integers(1, r_max + 1))
    m = int(rng.integers(r, m_max + 1))
    return WnlsProblem(rng.random((m, r)), rng.random(m), rng.random(m) * 2 - 0.3, rng.random(r))


def p_wnls_monotone(rng, sc):
    out = []
    for i in range(sc["reps"] * 4):
        p = _wnls_instance(rng, sc["r"], sc["m"])
        h, _ = solve_wnls(p)
        f0, f1 = p.objective(p.h0), p.objective(h)
        out.append(_res(i, f0, f1, 1e-10 * max(abs(f0), 1e-300), max(0.0, f1 - f0)))
    return out


def p_wnls_oracle(rng, sc, count=50):
    out = []
    for i in range(count):
        p = _wnls_instance(rng, 3, 6)
        # strict form of the stopping rule: no 1e-3 relaxation
        h, _ = solve_wnls(p, eps1=1e-6, floor=0.0, max_iter=5000)
        best, _ = active_set_oracle(p.w, p.d, p.v)
        out.append(_res(i, best, p.objective(h), 1e-6))
    return out


def p_wnls_gradient(rng, sc):
    out = []
    for i in range(sc["reps"] * 2):
        p = _wnls_instance(rng, sc["r"], sc["m"])
        z = rng.random(p.w.shape[1])
        g = wnls_gradient(p, z)
        fd = np.empty_like(z)
        for k in range(z.size):
            step = np.zeros_like(z)
            step[k] = 1e-6
            fd[k] = (p.objective(z + step) - p.objective(z - step)) / 2e-6
        rel = float(np.linalg.norm(g - fd) / max(np.linalg.norm(g), 1e-12))
        out.append(_res(i, 0.0, rel, 1e-5, rel))
    return out


def p_wnls_scaling(rng, sc):
    out = []
    for i in range(sc["reps"] * 2):
        p = _wnls_instance(rng, sc["r"], sc["m"])
        c = float(rng.uniform(0.1, 10.0))
        h1, _ = solve_wnls(p)
        h2, _ = solve_wnls(WnlsProblem(p.w, p.d * c, p.v, p.h0))
        out.append(_res(f"{i} c={c:.3g}", 0.0, 0.0, 1e-8, float(np.max(np.abs(h1 - h2)))))
    return out


# --- hq-cauchy ---------------------------------------------------------------

def _hq_cfg(rank, seed, **kw):
    base = dict(rank=rank, seed=seed, max_outer=60)
    base.update(kw)
    return SolverConfig(**base)


def p_hq_descent(rng, sc):
    out = []
    for i in range(sc["reps"]):
        v, vc = _planted(rng, sc["m"], sc["n"], sc["r"], 0.2)
        _, _, st = factorize(vc, _hq_cfg(sc["r"], i))
        rise = np.array(st.objective_trace) - np.array(st.objective_start)
        out.append(_res(i, 0.0, float(rise.max()), 1e-8, max(0.0, float(rise.max()))))
    return out


def _consistency_run(rng, sc, tamper):
    v, vc = _planted(rng, sc["m"], sc["n"], sc["r"], 0.3)
    worst = [0.0]

    def cb(t, phase, e, q, step):
        if tamper:
            q = update_weights(e, step.info["gamma"])  # outliers not zeroed
        worst[0] = max(worst[0], weight_consistency(e, q, step.info))

    factorize(vc, _hq_cfg(sc["r"], 0, max_outer=15), callback=cb)
    return worst[0]


def p_hq_weight_consistency(rng, sc):
    return [_res("entrywise", 0.0, d := _consistency_run(rng, sc, False), 0.0, d)]


def p_hq_weight_consistency_control(rng, sc):
    """Negative control: the consistency check must reject un-zeroed outlier weights."""
    d = _consistency_run(rng, sc, True)
    return [_flag("tampered weights rejected", d > 0.0)]


def p_hq_untruncated(rng, sc):
    v, vc = _planted(rng, sc["m"] // 2, sc["n"] // 2, 2, 0.1)
    gamma = 0.5
    seen = []

    def cb(t, phase, e, q, step):
        ref = losses.baseline_weight(e, losses.WeightFunction("cauchy", gamma=gamma))
        seen.append((float(np.min(q)), float(np.max(np.abs(q - ref)))))

    factorize(vc, _hq_cfg(2, 0, max_outer=10, scale_mode="fixed", gamma=gamma,
                          truncation_mode="none"), callback=cb)
    return [_flag("weights > 0", min(s[0] for s in seen) > 0),
            _res("matches cauchy weight", 0.0, 0.0, 0.0, max(s[1] for s in seen))]


def p_hq_determinism(rng, sc):
    v, vc = _planted(rng, sc["m"], sc["n"], sc["r"], 0.2)
    cfg = _hq_cfg(sc["r"], 3, max_outer=20)
    prev = _kernels.current_threads()
    try:
        _kernels.set_threads(1)
        w1, h1, _ = factorize(vc, cfg)
        _kernels.set_threads(0)  # all available workers
        w2, h2, _ = factorize(vc, cfg)
    finally:
        _kernels.set_threads(prev)
    return [_flag("threads 1 vs max", w1.tobytes() == w2.tobytes() and h1.tobytes() == h2.tobytes())]


def _iter_time(v, r):
    cfg = SolverConfig(rank=r, seed=0, max_outer=3, warmup=0, eps2=1e-300, eps1=1e-300,
                       inner_floor=0.0, max_inner=20)
    best = math.inf
    for _ in range(3):
        _, _, st = factorize(v, cfg)
        best = min(best, st.runtime / st.outer_iter)
    return best


def p_hq_complexity(rng, sc):
    m, n, r = sc["m"], sc["n"], min(sc["r"], 4)
    small = rng.random((m, r)) @ rng.random((r, n // 2))
    big = rng.random((m, r)) @ rng.random((r, n))
    _iter_time(small, r)  # warm caches / compilation
    ratio = _iter_time(big, r) / _iter_time(small, r)
    return [_res(f"{m}x{n // 2} -> {m}x{n}", 2.0, ratio, 2.5, ratio)]


def p_nagy(rng, sc):
    out = []
    for gamma in (0.5, 2.0, 10.0):
        e = gamma * rng.standard_cauchy(sc["mc"])
        est = estimate_scale_nagy(e, 1.0, tol=1e-10, max_iter=500)
        out.append(_res(f"cauchy gamma={gamma}", gamma, est, 0.1, abs(est - gamma) / gamma))
    for g0 in (0.3, 1.0, 4.0):
        e = np.full(50, g0) * np.where(rng.random(50) < 0.5, 1, -1)
        out.append(_res(f"fixed point {g0}", g0, est := estimate_scale_nagy(e, g0), 1e-12,
                        abs(est - g0)))
    return out


def p_coef_bound(rng, sc):
    out = []
    for i in range(sc["reps"]):
        v, vc = _planted(rng, sc["m"], sc["n"], sc["r"], 0.2)
        sigma, gamma = 4.0, 0.5
        w, h, _ = factorize(vc, _hq_cfg(sc["r"], i, max_outer=20, scale_mode="fixed", gamma=gamma,
                                        truncation_mode="explicit", sigma=sigma))
        if np.any(np.all(w == 0, axis=0)):
            out.append(_flag(f"{i} zero basis column", False))
            continue
        wn, scales = normalize_columns(w)
        hn = h * scales[:, None]
        alpha = np.linalg.norm(vc, axis=0)
        norms = np.linalg.norm(hn, axis=0)
        slack = norms - coef_bound(alpha, sigma, gamma)
        out.append(_res(i, 0.0, float(slack.max()), 0.0, max(0.0, float(slack.max()))))
    return out


def _line_angle(w):
    u = w[:, 0] / np.linalg.norm(w[:, 0])
    ref = np.array([1.0, 0.2]) / np.hypot(1.0, 0.2)
    return math.degrees(math.acos(min(1.0, abs(float(u @ ref)))))


def p_line_recovery(rng, sc):
    out = []
    for s in range(sc["line_seeds"]):
        v, _, _ = datagen.gen_line(datagen.SyntheticLineSpec(n_outliers=80, seed=s))
        w, _, _ = factorize(v, SolverConfig(rank=1, seed=s))
        ang = _line_angle(w)
        out.append(_res(f"seed {s}", 0.0, ang, 5.0, ang))
    return out


# --- baselines ---------------------------------------------------------------

def p_l2_monotone(rng, sc):
    out = []
    for i in range(sc["reps"]):
        v = rng.random((sc["m"], sc["r"])) @ rng.random((sc["r"], sc["n"])) + 0.1 * rng.random((sc["m"], sc["n"]))
        _, _, tr = factorize_baseline(v, BaselineConfig("l2", rank=sc["r"], seed=i, max_outer=30))
        f = np.concatenate([[tr.objective_start[0]], tr.objective_trace])
        rise = float(np.max(np.diff(f)))
        out.append(_res(i, 0.0, rise, 1e-8, max(0.0, rise)))
    return out


def p_uniform_weights(rng, sc):
    e = np.full((6, 5), float(rng.uniform(0.1, 3.0)))
    out = []
    for fn in (losses.WeightFunction("huber", c=float(np.median(np.abs(e)))),
               losses.WeightFunction("cim", width=float(np.sqrt(np.mean(e * e)))),
               losses.WeightFunction("cauchy", gamma=0.8)):
        wts = losses.baseline_weight(e, fn)
        out.append(_res(fn.kind, 0.0, 0.0, 0.0, float(wts.max() - wts.min())))
    return out


def p_cauchy_matches_hq(rng, sc):
    v, vc = _planted(rng, sc["m"], sc["n"], sc["r"], 0.2)
    gamma = 0.4
    _, _, tr = factorize_baseline(vc, BaselineConfig("cauchy", rank=sc["r"], seed=5, gamma=gamma,
                                                     max_outer=25))
    _, _, st = factorize(vc, _hq_cfg(sc["r"], 5, max_outer=25, scale_mode="fixed", gamma=gamma,
                                     truncation_mode="none"))
    if len(tr.objective_trace) != len(st.objective_trace):
        return [_flag("trace lengths", False)]
    d = float(np.max(np.abs(np.array(tr.objective_trace) - np.array(st.objective_trace))))
    return [_res("objective traces", 0.0, d, 1e-10, d)]


# --- datagen -----------------------------------------------------------------

def _corruptions(rng):
    s = int(rng.integers(2**31))
    return [(datagen.CorruptionSpec("laplace", seed=s, delta=40.0), None),
            (datagen.CorruptionSpec("salt-pepper", seed=s, p=0.3), None),
            (datagen.CorruptionSpec("block", seed=s, b=3, fill=550.0), (8, 8))]


def p_corrupt_mask(rng, sc):
    v = 255 * rng.random((64, 12))
    out = []
    for spec, shape in _corruptions(rng):
        vc, mask = datagen.corrupt(v, spec, image_shape=shape)
        outside = bool(np.array_equal(vc[~mask], v[~mask]))
        out.append(_flag(f"{spec.kind} untouched outside mask", outside))
        out.append(_flag(f"{spec.kind} nonnegative", bool(np.all(vc >= 0))))
    return out


def p_datagen_determinism(rng, sc):
    s = int(rng.integers(2**31))
    same = []
    same.append(all(np.array_equal(a, b) for a, b in zip(
        datagen.gen_line(datagen.SyntheticLineSpec(n_outliers=40, seed=s)),
        datagen.gen_line(datagen.SyntheticLineSpec(n_outliers=40, seed=s)))))
    same.append(all(np.array_equal(a, b) for a, b in zip(
        datagen.gen_lowrank(20, 15, 3, s), datagen.gen_lowrank(20, 15, 3, s))))
    same.append(all(np.array_equal(a, b) for a, b in zip(
        datagen.gen_clustered(20, 15, 3, s), datagen.gen_clustered(20, 15, 3, s))))
    v = 255 * rng.random((64, 5))
    for spec, shape in _corruptions(rng):
        a = datagen.corrupt(v, spec, image_shape=shape)
        b = datagen.corrupt(v, spec, image_shape=shape)
        same.append(np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1]))
    return [_flag(name, ok) for name, ok in zip(
        ("line", "lowrank", "clustered", "laplace", "salt-pepper", "block"), same)]


# --- eval --------------------------------------------------------------------

def p_metric_permutation(rng, sc):
    out = []
    for i in range(sc["reps"]):
        k = int(rng.integers(2, 8))
        truth = rng.integers(0, k, 300)
        pred = np.where(rng.random(300) < 0.7, truth, rng.integers(0, k, 300))
        perm = rng.permutation(k)
        a0, n0 = metrics.accuracy(pred, truth), metrics.nmi(pred, truth)
        out.append(_res(f"{i} accuracy", a0, metrics.accuracy(perm[pred], truth), 1e-12))
        out.append(_res(f"{i} nmi", n0, metrics.nmi(perm[pred], perm[truth]), 1e-12))
        out.append(_res(f"{i} accuracy symmetry", a0, metrics.accuracy(truth, pred), 1e-12))
    return out


def p_kmeans_inertia(rng, sc):
    out = []
    for i in range(sc["reps"]):
        x = rng.random((sc["r"], 200))
        res = metrics.kmeans(x, 4, restarts=1, seed=i, details=True)
        rise = float(np.max(np.diff(res.history))) if len(res.history) > 1 else 0.0
        out.append(_res(i, 0.0, rise, 1e-9 * res.history[0], max(0.0, rise)))
    return out


# --- cli / io ----------------------------------------------------------------

def p_csv_roundtrip(rng, sc):
    a = rng.standard_normal((7, 5)) * 10.0 ** rng.integers(-300, 300, (7, 5))
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "m.csv"
        io.write_matrix(path, a)
        back = io.read_matrix(path)
    return [_flag("bit-exact", back.tobytes() == a.tobytes())]


def p_pgm_variants(rng, sc):
    img = rng.integers(0, 256, (6, 4)).astype(float)
    with tempfile.TemporaryDirectory() as tmp:
        io.write_pgm(Path(tmp) / "a.pgm", img, binary=False)
        io.write_pgm(Path(tmp) / "b.pgm", img, binary=True)
        a, b = io.read_pgm(Path(tmp) / "a.pgm"), io.read_pgm(Path(tmp) / "b.pgm")
        v, shape, _ = io.read_pgm_dir(tmp)
    return [_flag("P2 == P5", np.array_equal(a, b) and np.array_equal(a, img)),
            _flag("row-major column", shape == img.shape and np.array_equal(v[:, 0], img.ravel()))]


def p_exit_codes(rng, sc):
    from .cli import main
    with tempfile.TemporaryDirectory() as tmp:
        ok = main(["synth", "lowrank", "--m", "6", "--n", "5", "--rank", "2", "--out", tmp]) == 0
        ok = ok and (Path(tmp) / "V.csv").is_file()
        blocker = Path(tmp) / "V.csv"  # a file where a directory is expected
        bad = main(["synth", "lowrank", "--m", "6", "--n", "5", "--rank", "2",
                    "--out", str(blocker / "sub")]) != 0
    return [_flag("success -> 0", ok), _flag("unwritable -> nonzero", bad)]


PROPERTIES = [
    ("matrix-core", "matmul-associativity", p_matmul_assoc),
    ("matrix-core", "project-idempotent", p_project_idempotent),
    ("matrix-core", "spectral-norm-bound", p_spectral_bound),
    ("matrix-core", "rng-determinism", p_rng_determinism),
    ("losses", "hq-weight-inverse", p_hq_weight_inverse),
    ("losses", "g-monotone-concave", p_g_monotone_concave),
    ("losses", "truncated-unbounded-equals-cauchy", p_truncated_unbounded),
    ("losses", "weight-monotone", p_weight_monotone),
    ("losses", "weight-range", p_weight_range),
    ("losses", "conjugacy", p_conjugacy),
    ("wnls-solver", "monotone-objective", p_wnls_monotone),
    ("wnls-solver", "oracle-equivalence", p_wnls_oracle),
    ("wnls-solver", "gradient-check", p_wnls_gradient),
    ("wnls-solver", "scaling-invariance", p_wnls_scaling),
    ("hq-cauchy", "descent", p_hq_descent),
    ("hq-cauchy", "weight-consistency", p_hq_weight_consistency),
    ("hq-cauchy", "weight-consistency-negative-control", p_hq_weight_consistency_control),
    ("hq-cauchy", "untruncated-reduction", p_hq_untruncated),
    ("hq-cauchy", "thread-determinism", p_hq_determinism),
    ("hq-cauchy", "complexity", p_hq_complexity),
    ("hq-cauchy", "nagy-estimator", p_nagy),
    ("hq-cauchy", "coefficient-bound", p_coef_bound),
    ("hq-cauchy", "line-recovery", p_line_recovery),
    ("baselines", "l2-monotone", p_l2_monotone),
    ("baselines", "uniform-weights", p_uniform_weights),
    ("baselines", "cauchy-equals-hq", p_cauchy_matches_hq),
    ("datagen", "corrupt-mask-and-sign", p_corrupt_mask),
    ("datagen", "seed-determinism", p_datagen_determinism),
    ("eval", "permutation-invariance", p_metric_permutation),
    ("eval", "kmeans-inertia-monotone", p_kmeans_inertia),
    ("cli", "csv-roundtrip", p_csv_roundtrip),
    ("cli", "pgm-variants", p_pgm_variants),
    ("cli", "exit-codes", p_exit_codes),
]

TIMING = {"complexity"}


def run_property(module, name, fn, seed, scale):
    sc = SCALES[scale]
    # each property gets its own stream, so adding or skipping one leaves the others unchanged
    rng = make_rng(seed, sum(map(ord, f"{module}/{name}")))
    t0 = time.perf_counter()
    try:
        results = fn(rng, sc)
        error = ""
    except Exception as exc:  # failures are data
        results, error = [], f"{type(exc).__name__}: {exc}"
    passed = bool(results) and not error and all(r.passed for r in results)
    return {
        "module": module, "name": name, "passed": passed, "error": error,
        "n_instances": len(results),
        "max_discrepancy": max((r.discrepancy for r in results), default=math.nan),
        "results": [asdict(r) for r in results],
        "timing": name in TIMING,
        "runtime": time.perf_counter() - t0,
    }


def run_suite(seed=0, scale="quick", only=None):
    """Run every property (or those named in ``only``) and return the summary dict."""
    if scale not in SCALES:
        raise ValueError(f"scale must be one of {tuple(SCALES)}, got {scale!r}")
    t0 = time.perf_counter()
    props = [run_property(mod, name, fn, seed, scale) for mod, name, fn in PROPERTIES
             if only is None or name in only]
    return {
        "seed": seed, "scale": scale, "backend": _kernels.BACKEND,
        "total": len(props), "passed": sum(p["passed"] for p in props),
        "all_passed": all(p["passed"] for p in props),
        "properties": props, "runtime": time.perf_counter() - t0,
    }
