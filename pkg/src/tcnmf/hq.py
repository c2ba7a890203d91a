"""Truncated CauchyNMF solved by half-quadratic alternating optimization.

Each outer iteration re-estimates the Cauchy scale from the residual,
flags outliers with a three-sigma rule fitted on the smaller half of the
residual magnitudes, zeroes their weights, and then solves the weighted
NNLS problems for every column of H and every row of W.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _driver

SCALE_MODES = ("nagy", "fixed")
TRUNCATION_MODES = ("robust-stat", "explicit", "none")


@dataclass
class SolverConfig:
    rank: int
    eps1: float = 1e-6
    eps2: float = 1e-6
    max_outer: int = 500
    max_inner: int = 500
    scale_mode: str = "nagy"
    gamma: float = None  # used when scale_mode == "fixed"; None = median |E0|
    truncation_mode: str = "robust-stat"
    sigma: float = None  # used when truncation_mode == "explicit"
    seed: int = 0
    gamma_min: float = None  # None = 1e-4 * median |V|
    burn_in: int = 1
    nagy_tol: float = 1e-6
    nagy_max_iter: int = 50
    inner_floor: float = 1e-3
    warmup: int = 10  # unweighted alternating iterations refining the random start

    def validate(self, shape=None):
        if self.rank < 1:
            raise ValueError(f"rank must be >= 1, got {self.rank}")
        if shape is not None and self.rank > min(shape):
            raise ValueError(f"rank {self.rank} exceeds min{tuple(shape)}")
        if not (self.eps1 > 0 and self.eps2 > 0):
            raise ValueError("eps1 and eps2 must be > 0")
        if self.scale_mode not in SCALE_MODES:
            raise ValueError(f"scale_mode must be one of {SCALE_MODES}")
        if self.truncation_mode not in TRUNCATION_MODES:
            raise ValueError(f"truncation_mode must be one of {TRUNCATION_MODES}")
        if self.truncation_mode == "explicit" and not (self.sigma and self.sigma > 0):
            raise ValueError("explicit truncation needs sigma > 0")
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError("gamma must be > 0")
        if self.gamma_min is not None and not self.gamma_min > 0:
            raise ValueError("gamma_min must be > 0")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.warmup < 0 or self.burn_in < 0:
            raise ValueError("warmup and burn_in must be >= 0")

    def to_dict(self):
        return asdict(self)


@dataclass
class HqState:
    w: np.ndarray
    h: np.ndarray
    residual: np.ndarray  # residual the final weights were computed from
    weights: np.ndarray
    gamma: float
    outliers: np.ndarray  # boolean mask, same shape as V
    threshold: float  # residual magnitude above which weights are zero
    objective_trace: list = field(default_factory=list)
    objective_start: list = field(default_factory=list)
    gamma_trace: list = field(default_factory=list)
    outlier_trace: list = field(default_factory=list)
    outer_iter: int = 0
    termination: str = "max_iter"
    runtime: float = 0.0
    gamma_min: float = 0.0
    warmup_iters: int = 0


def update_weights(e, gamma, outliers=None):
    """Q = 1/(1+(E/gamma)^2), zeroed on the outlier mask."""
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    e = np.asarray(e, dtype=np.float64)
    q = 1.0 / (1.0 + (e / gamma) ** 2)
    if outliers is not None:
        q[np.asarray(outliers, dtype=bool)] = 0.0
    return q


def estimate_scale_nagy(e, gamma0, tol=1e-6, max_iter=50, gamma_min=1e-12):
    """Cauchy scale of zero-location residuals by Nagy's fixed-point iteration."""
    if not gamma0 > 0:
        raise ValueError(f"gamma0 must be > 0, got {gamma0}")
    e = np.asarray(e, dtype=np.float64).ravel()
    if e.size == 0 or not np.any(e):
        return float(gamma_min)
    e2 = e * e
    gamma = float(gamma0)
    for _ in range(max_iter):
        mean_w = float(np.mean(1.0 / (1.0 + e2 / (gamma * gamma))))
        if mean_w >= 1.0:
            gamma = 0.0
            break
        new = gamma * math.sqrt(1.0 / mean_w - 1.0)
        if new <= 0.0:
            gamma = 0.0
            break
        done = abs(new - gamma) <= tol * gamma
        gamma = new
        if done:
            break
    return max(gamma, float(gamma_min))


def outlier_threshold(e):
    """mu + 3 delta of the residual magnitudes at or below their median."""
    theta = np.abs(np.asarray(e, dtype=np.float64)).ravel()
    if theta.size == 0:
        return math.inf
    low = theta[theta <= np.median(theta)]
    mu = float(np.mean(low))
    delta = max(float(np.std(low)), 1e-12 + 1e-6 * mu)
    return mu + 3.0 * delta


def detect_outliers(e):
    """Boolean mask of entries whose residual magnitude exceeds the three-sigma threshold."""
    e = np.asarray(e, dtype=np.float64)
    return np.abs(e) > outlier_threshold(e)


def truncated_objective(e, gamma, threshold=math.inf):
    """1/2 sum g((E/gamma)^2) with the flat part starting at |E| = threshold."""
    a = np.minimum(np.abs(np.asarray(e, dtype=np.float64)), threshold)
    return 0.5 * float(np.sum(np.log1p((a / gamma) ** 2)))


def default_gamma_min(v):
    med = float(np.median(np.abs(v)))
    if med == 0.0:
        med = float(np.mean(np.abs(v)))
    return 1e-4 * med if med > 0 else 1e-12


def coef_bound(alpha, sigma, gamma):
    return 2.0 * alpha + sigma * alpha / (math.sqrt(2.0) * gamma)


def coef_bound_check(w, h_col, sigma, gamma, alpha):
    """True iff ||h|| <= 2 alpha + sigma alpha / (sqrt(2) gamma) for unit-norm W columns."""
    w = np.asarray(w, dtype=np.float64)
    norms = np.sqrt(np.sum(w * w, axis=0))
    if not np.allclose(norms, 1.0, rtol=0, atol=1e-9):
        raise ValueError("coef_bound_check needs column-normalised W (see normalize_columns)")
    return bool(np.linalg.norm(np.asarray(h_col, dtype=np.float64)) <= coef_bound(alpha, sigma, gamma))


def factorize(v, cfg, w0=None, h0=None, callback=None):
    """Truncated CauchyNMF of a non-negative matrix.

    Returns ``(w, h, state)``. ``callback(t, phase, e, q, step)`` is called
    before every H (phase "h") and W (phase "w") solve with the residual
    and weights that solve will use.
    """
    v = _driver.check_input(v, cfg.rank)
    cfg.validate(v.shape)
    w, h, warm_iters = _driver.initialize(v, cfg, w0, h0)
    gamma_min = cfg.gamma_min if cfg.gamma_min is not None else default_gamma_min(v)
    ctx = {"gamma": cfg.gamma}

    def prepare(e, t):
        gamma = ctx["gamma"]
        if gamma is None:
            med = float(np.median(np.abs(e)))
            gamma = med if med > gamma_min else gamma_min
        if cfg.scale_mode == "nagy":
            gamma = estimate_scale_nagy(e, gamma, cfg.nagy_tol, cfg.nagy_max_iter, gamma_min)
        ctx["gamma"] = gamma

        if cfg.truncation_mode == "robust-stat" and t >= cfg.burn_in:
            thr = outlier_threshold(e)
        elif cfg.truncation_mode == "explicit":
            thr = gamma * math.sqrt(cfg.sigma)
        else:
            thr = math.inf

        def weights(res):
            return update_weights(res, gamma, np.abs(res) > thr)

        def objective(res):
            return truncated_objective(res, gamma, thr)

        sigma = (thr / gamma) ** 2 if math.isfinite(thr) else math.inf
        info = {"gamma": gamma, "threshold": thr, "sigma": sigma,
                "n_outliers": int(np.count_nonzero(np.abs(e) > thr))}
        return _driver.Step(weights, objective, info)

    w, h, hist = _driver.run(v, w, h, prepare, eps1=cfg.eps1, eps2=cfg.eps2,
                             max_outer=cfg.max_outer, max_inner=cfg.max_inner,
                             floor=cfg.inner_floor, callback=callback)

    last = hist.info[-1]
    gamma, thr = last["gamma"], last["threshold"]
    # weights as they would enter the next H solve, frozen at the last iteration's gamma
    res = v - w @ h
    mask = np.abs(res) > thr
    state = HqState(
        w=w, h=h, residual=res, weights=update_weights(res, gamma, mask), gamma=gamma,
        outliers=mask, threshold=thr,
        objective_trace=list(hist.objective), objective_start=list(hist.objective_start),
        gamma_trace=[i["gamma"] for i in hist.info],
        outlier_trace=[i["n_outliers"] for i in hist.info],
        outer_iter=hist.iterations, termination=hist.termination, runtime=hist.runtime,
        gamma_min=gamma_min, warmup_iters=warm_iters,
    )
    return w, h, state
