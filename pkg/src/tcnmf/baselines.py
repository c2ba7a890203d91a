"""Reweighted NMF baselines: L2, L1, L2,1, Huber, CIM and plain Cauchy.

All of them run the same alternating WNLS loop as the Truncated Cauchy
solver, with entry weights taken from the normalised IRLS weight of
each loss. Loss parameters that depend on the residual (Huber cutoff,
CIM width) are refreshed once per outer iteration.
"""

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import _driver
from .losses import TAU_SMOOTH, WeightFunction, baseline_weight

METHODS = ("l2", "l1", "l21", "huber", "cim", "cauchy")

_KIND = {"l2": "l2", "l1": "l1", "l21": "l21-column", "huber": "huber", "cim": "cim", "cauchy": "cauchy"}


@dataclass
class BaselineConfig:
    method: str
    rank: int
    eps1: float = 1e-6
    eps2: float = 1e-6
    max_outer: int = 500
    max_inner: int = 500
    seed: int = 0
    gamma: float = None  # cauchy scale; None = median |E0|
    inner_floor: float = 1e-3
    warmup: int = 10  # same start refinement as the Truncated Cauchy solver; unused by l2

    def validate(self, shape=None):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.rank < 1 or (shape is not None and self.rank > min(shape)):
            raise ValueError(f"rank {self.rank} out of range for shape {shape}")
        if not (self.eps1 > 0 and self.eps2 > 0):
            raise ValueError("eps1 and eps2 must be > 0")
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError("gamma must be > 0")

    def to_dict(self):
        return asdict(self)


@dataclass
class BaselineTrace:
    objective_trace: list = field(default_factory=list)
    objective_start: list = field(default_factory=list)
    params: list = field(default_factory=list)
    outer_iter: int = 0
    termination: str = "max_iter"
    runtime: float = 0.0


def huber_loss(e, c):
    a = np.abs(e)
    return float(np.sum(np.where(a <= c, a * a, 2.0 * c * a - c * c)))


def cim_loss(e, width):
    return float(np.sum(1.0 - np.exp(-(e * e) / (2.0 * width ** 2)) / (math.sqrt(2.0 * math.pi) * width)))


def column_weights(e, fn):
    """Broadcast the l21 column weight of each residual column to its entries."""
    norms = np.sqrt(np.sum(e * e, axis=0))
    return np.broadcast_to(baseline_weight(norms, fn), e.shape).copy()


def _step_factory(method, gamma_ref):
    kind = _KIND[method]

    def prepare(e, t):
        if method == "l2":
            return _driver.l2_step(e, t)
        if method == "l1":
            fn = WeightFunction("l1")
            objective = lambda r: float(np.sum(np.abs(r)))
        elif method == "l21":
            fn = WeightFunction("l21-column")
            objective = lambda r: float(np.sum(np.sqrt(np.sum(r * r, axis=0))))
        elif method == "huber":
            c = max(float(np.median(np.abs(e))), TAU_SMOOTH)
            fn = WeightFunction("huber", c=c)
            objective = lambda r: huber_loss(r, c)
        elif method == "cim":
            width = max(math.sqrt(float(np.mean(e * e))), TAU_SMOOTH)
            fn = WeightFunction("cim", width=width)
            objective = lambda r: cim_loss(r, width)
        else:
            if gamma_ref[0] is None:
                med = float(np.median(np.abs(e)))
                gamma_ref[0] = med if med > 0 else 1.0
            gamma = gamma_ref[0]
            fn = WeightFunction("cauchy", gamma=gamma)
            # 1/2 factor keeps the trace comparable with the HQ solver
            objective = lambda r: 0.5 * float(np.sum(np.log1p((r / gamma) ** 2)))

        if kind == "l21-column":
            weights = lambda r: column_weights(r, fn)
        else:
            weights = lambda r: baseline_weight(r, fn)
        params = {k: getattr(fn, k) for k in ("c", "width", "gamma") if getattr(fn, k) is not None}
        return _driver.Step(weights, objective, params)

    return prepare


def factorize_baseline(v, cfg, w0=None, h0=None):
    """Fit one baseline model. Returns ``(w, h, trace)``."""
    v = _driver.check_input(v, cfg.rank)
    cfg.validate(v.shape)
    if cfg.method == "l2":
        cfg = replace(cfg, warmup=0)
    w, h, _ = _driver.initialize(v, cfg, w0, h0)
    prepare = _step_factory(cfg.method, [cfg.gamma])
    w, h, hist = _driver.run(v, w, h, prepare, eps1=cfg.eps1, eps2=cfg.eps2,
                             max_outer=cfg.max_outer, max_inner=cfg.max_inner,
                             floor=cfg.inner_floor)
    trace = BaselineTrace(list(hist.objective), list(hist.objective_start), list(hist.info),
                          hist.iterations, hist.termination, hist.runtime)
    return w, h, trace
