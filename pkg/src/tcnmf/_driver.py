"""Alternating reweighted WNLS loop shared by the HQ solver and the baselines."""

import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .matrix import make_rng


@dataclass
class Step:
    """Per-iteration frozen quantities: how to weight residuals and score them.

    ``weights`` maps a residual matrix to entrywise weights, ``objective``
    maps it to the loss value; both stay fixed for the whole outer
    iteration so the iteration is a majorize-minimize step.
    """

    weights: object
    objective: object
    info: dict = field(default_factory=dict)


@dataclass
class History:
    objective: list = field(default_factory=list)
    objective_start: list = field(default_factory=list)
    info: list = field(default_factory=list)
    inner_iters: list = field(default_factory=list)
    termination: str = "max_iter"
    iterations: int = 0
    runtime: float = 0.0


def check_input(v, rank):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 2:
        raise ValueError(f"data matrix must be 2-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("data matrix contains NaN or Inf")
    if np.any(v < 0):
        raise ValueError("data matrix has negative entries; NMF needs V >= 0")
    m, n = v.shape
    if not 0 < rank <= min(m, n):
        raise ValueError(f"rank must be in [1, {min(m, n)}] for a {m}x{n} matrix, got {rank}")
    return v


def init_factors(v, rank, seed):
    m, n = v.shape
    rng = make_rng(seed)
    scale = np.sqrt(max(float(np.mean(v)), 0.0) / rank)
    if scale == 0.0:
        scale = 1.0
    w = rng.random((m, rank)) * scale
    h = rng.random((rank, n)) * scale
    return w, h


def l2_step(e, t):
    return Step(lambda r: np.ones_like(r), lambda r: float(np.sum(r * r)))


def initialize(v, cfg, w0=None, h0=None):
    """Seeded uniform start, refined by ``cfg.warmup`` unweighted iterations.

    Returns ``(w, h, warmup_iterations_run)``.
    """
    if w0 is None or h0 is None:
        w, h = init_factors(v, cfg.rank, cfg.seed)
    else:
        w, h = np.array(w0, dtype=np.float64), np.array(h0, dtype=np.float64)
        if w.shape != (v.shape[0], cfg.rank) or h.shape != (cfg.rank, v.shape[1]):
            raise ValueError(f"initial factors {w.shape}, {h.shape} do not match V {v.shape} at rank {cfg.rank}")
    if cfg.warmup <= 0:
        return w, h, 0
    w, h, hist = run(v, w, h, l2_step, eps1=cfg.eps1, eps2=cfg.eps2, max_outer=cfg.warmup,
                     max_inner=cfg.max_inner, floor=cfg.inner_floor)
    return w, h, hist.iterations


def solve_h(w, q, v, h, eps1, floor, max_inner):
    out, iters, *_ = _kernels.solve_columns(w, q, v, h, eps1, floor, max_inner)
    return out, iters


def solve_w(w, q, v, h, eps1, floor, max_inner):
    out, iters, *_ = _kernels.solve_columns(h.T, q.T, v.T, w.T, eps1, floor, max_inner)
    return out.T.copy(), iters


def run(v, w, h, prepare, *, eps1, eps2, max_outer, max_inner, floor=1e-3, callback=None):
    """Alternate H and W solves until the relative-change rule fires.

    ``prepare(e, t)`` returns the :class:`Step` for iteration ``t`` given
    the residual at its start. Convergence: the objective change over the
    iteration, divided by the total decrease since the initial factors,
    falls to ``eps2``.
    """
    hist = History()
    start = time.perf_counter()
    e_first = None
    for t in range(1, max_outer + 1):
        e = v - w @ h
        if e_first is None:
            e_first = e
        step = prepare(e, t)
        f_start = step.objective(e)
        # the loss may change between iterations (scale, truncation), so the
        # starting point is re-scored under the current one
        f_first = step.objective(e_first)
        q = step.weights(e)
        if callback is not None:
            callback(t, "h", e, q, step)
        h, it_h = solve_h(w, q, v, h, eps1, floor, max_inner)

        e = v - w @ h
        q = step.weights(e)
        if callback is not None:
            callback(t, "w", e, q, step)
        w, it_w = solve_w(w, q, v, h, eps1, floor, max_inner)

        e = v - w @ h
        f_end = step.objective(e)
        hist.objective.append(f_end)
        hist.objective_start.append(f_start)
        hist.info.append(step.info)
        hist.inner_iters.append(int(it_h.sum() + it_w.sum()))
        hist.iterations = t

        change = abs(f_end - f_start)
        total = abs(f_first - f_end)
        if change == 0.0 and total == 0.0:
            hist.termination = "converged"
            break
        if t > 1 and change <= eps2 * total:
            hist.termination = "converged"
            break
    hist.runtime = time.perf_counter() - start
    return w, h, hist
