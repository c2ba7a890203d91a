"""Truncated Cauchy loss, its half-quadratic weights and the baseline IRLS weights.

Every weight function is normalised so a zero residual gets weight one;
constant factors cancel inside the weighted least-squares subproblems.
"""

import math
from dataclasses import dataclass

import numpy as np

UNBOUNDED = math.inf

# floor for the 1/|e| style weights at an exact fit
TAU_SMOOTH = 1e-8

KINDS = ("l2", "l1", "l21-column", "huber", "cim", "cauchy", "truncated-cauchy")


@dataclass(frozen=True)
class TruncatedCauchyLoss:
    gamma: float
    sigma: float = UNBOUNDED

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    @property
    def threshold(self):
        """Residual magnitude above which the loss is flat."""
        return self.gamma * math.sqrt(self.sigma)


@dataclass(frozen=True)
class WeightFunction:
    kind: str
    c: float = None  # huber cutoff
    width: float = None  # cim kernel width
    gamma: float = None  # cauchy scale
    sigma: float = UNBOUNDED  # truncation

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}; expected one of {KINDS}")

    def __call__(self, e):
        return baseline_weight(e, self)


def _check_nonneg(x):
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0):
        raise ValueError("argument must be >= 0")
    return x


def _out(arr):
    return float(arr) if arr.ndim == 0 else arr


def g(x, sigma=UNBOUNDED):
    """ln(1+x) on [0, sigma], constant ln(1+sigma) beyond."""
    x = _check_nonneg(x)
    return _out(np.log1p(np.minimum(x, sigma)))


def hq_weight(x, sigma=UNBOUNDED):
    """Magnitude of the conjugate maximiser: 1/(1+x) up to sigma, 0 beyond."""
    x = _check_nonneg(x)
    return _out(np.where(x <= sigma, 1.0 / (1.0 + x), 0.0))


def objective(v, w, h, loss):
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if w.shape[1] != h.shape[0] or v.shape != (w.shape[0], h.shape[1]):
        raise ValueError(f"shape mismatch: V {v.shape}, W {w.shape}, H {h.shape}")
    return residual_objective(v - w @ h, loss.gamma, loss.sigma)


def residual_objective(e, gamma, sigma=UNBOUNDED):
    x = (np.asarray(e, dtype=np.float64) / gamma) ** 2
    return 0.5 * float(np.sum(np.log1p(np.minimum(x, sigma))))


def baseline_weight(e, fn):
    """IRLS weight for residual ``e`` (the column residual norm for l21-column)."""
    e = np.abs(np.asarray(e, dtype=np.float64))
    kind = fn.kind
    if kind == "l2":
        w = np.ones_like(e)
    elif kind in ("l1", "l21-column"):
        w = 1.0 / np.maximum(e, TAU_SMOOTH)
        # scale so that weight(0) = 1
        w = w * TAU_SMOOTH
    elif kind == "huber":
        if fn.c is None:
            raise ValueError("huber weight needs cutoff c")
        c = max(fn.c, TAU_SMOOTH)
        w = np.where(e <= c, 1.0, c / np.where(e > 0, e, 1.0))
    elif kind == "cim":
        if fn.width is None:
            raise ValueError("cim weight needs kernel width")
        w = np.exp(-(e * e) / (2.0 * fn.width ** 2))
    elif kind == "cauchy":
        if fn.gamma is None:
            raise ValueError("cauchy weight needs gamma")
        w = 1.0 / (1.0 + (e / fn.gamma) ** 2)
    else:
        if fn.gamma is None:
            raise ValueError("truncated-cauchy weight needs gamma")
        w = hq_weight((e / fn.gamma) ** 2, fn.sigma)
    return _out(np.asarray(w, dtype=np.float64))


def conjugate(y, sigma=UNBOUNDED):
    """f*(y) = sup_{x>=0} (x y - f(x)) for the core function f = -g, y in [-1, 0].

    For y in (-1, 0) the interior stationary point is x = -1/y - 1; on a
    bounded domain the supremum is the larger of that point's value (when
    it lies in [0, sigma]) and the plateau value reached as x -> sigma+.
    """
    y = np.asarray(y, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = np.where(y < 0, -1.0 / y - 1.0, np.inf)
        xs = np.clip(xs, 0.0, sigma)
        interior = np.where(np.isfinite(xs), xs * y + np.log1p(xs), -np.inf)
    if math.isinf(sigma):
        plateau = np.where(y == 0, np.inf, -np.inf)
    else:
        # just past sigma: f(x) = -ln(1+sigma), so x y - f(x) -> sigma y + ln(1+sigma)
        plateau = np.where(y <= 0, sigma * y + math.log1p(sigma), np.inf)
    return np.maximum(interior, plateau)


def verify_conjugacy(x, sigma=UNBOUNDED, grid=200001):
    """Grid maximum over y in [-1, 0] of y x - f*(y); should equal -g(x)."""
    if x < 0:
        raise ValueError("x must be >= 0")
    ys = np.linspace(-1.0, 0.0, grid)
    fstar = conjugate(ys, sigma)
    vals = ys * x - fstar
    vals = np.where(np.isfinite(vals), vals, -np.inf)
    return float(np.max(vals))
