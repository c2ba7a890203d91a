"""Weighted non-negative least squares by Nesterov's optimal gradient method.

Solves ``min_{h >= 0} 1/2 (W h - v)^T D (W h - v)`` with ``D = diag(d)``.
The factorization drivers call the batched kernel directly; this module
is the single-column surface plus the gradient helpers.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels

DEFAULT_EPS1 = 1e-6
RELAX_FLOOR = 1e-3
DEFAULT_MAX_ITER = 500

_STATUS = {
    _kernels.CONVERGED: "converged",
    _kernels.MAX_ITER: "max_iter",
    _kernels.SKIPPED: "skipped",
    _kernels.REVERTED: "reverted",
}


@dataclass(frozen=True)
class WnlsProblem:
    w: np.ndarray
    d: np.ndarray
    v: np.ndarray
    h0: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        d = np.asarray(self.d, dtype=np.float64).ravel()
        v = np.asarray(self.v, dtype=np.float64).ravel()
        h0 = np.asarray(self.h0, dtype=np.float64).ravel()
        if w.ndim != 2:
            raise ValueError(f"w must be 2-D, got shape {w.shape}")
        m, r = w.shape
        if d.size != m or v.size != m:
            raise ValueError(f"d and v need {m} entries, got {d.size} and {v.size}")
        if h0.size != r:
            raise ValueError(f"h0 needs {r} entries, got {h0.size}")
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise ValueError("weights d must be finite and >= 0")
        if np.any(h0 < 0):
            raise ValueError("warm start h0 must be >= 0")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "h0", h0)

    def objective(self, h):
        res = self.w @ np.asarray(h, dtype=np.float64) - self.v
        return 0.5 * float(np.sum(self.d * res * res))


@dataclass(frozen=True)
class OgmTrace:
    iterations: int
    initial_pg_norm: float
    final_pg_norm: float
    lipschitz: float
    status: str


def wnls_gradient(p, z):
    z = np.asarray(z, dtype=np.float64).ravel()
    if z.size != p.w.shape[1]:
        raise ValueError(f"z needs {p.w.shape[1]} entries, got {z.size}")
    wd = p.w.T * p.d
    return wd @ (p.w @ z) - wd @ p.v


def projected_gradient(p, h):
    h = np.asarray(h, dtype=np.float64).ravel()
    if np.any(h < 0):
        raise ValueError("projected gradient is defined for h >= 0 only")
    grad = wnls_gradient(p, h)
    return np.where(h > 0, grad, np.minimum(grad, 0.0))


def momentum(alpha):
    return (1.0 + np.sqrt(4.0 * alpha * alpha + 1.0)) / 2.0


def solve_wnls(p, eps1=DEFAULT_EPS1, max_iter=DEFAULT_MAX_ITER, floor=RELAX_FLOOR):
    """Run OGM from the warm start ``p.h0``.

    Stops once the projected-gradient norm drops to
    ``max(eps1, floor)`` times its value at the warm start. ``floor`` is
    the relaxation level; lowering it asks for a tighter solve.
    """
    if not eps1 > 0:
        raise ValueError(f"eps1 must be > 0, got {eps1}")
    out, iters, status, pg0, pgf, lips = _kernels.solve_columns(
        p.w, p.d[:, None], p.v[:, None], p.h0[:, None], eps1, floor, max_iter)
    trace = OgmTrace(int(iters[0]), float(pg0[0]), float(pgf[0]), float(lips[0]),
                     _STATUS[int(status[0])])
    return out[:, 0].copy(), trace
