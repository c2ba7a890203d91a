"""Seeded synthetic datasets and corruption generators.

Every generator takes an explicit seed and returns fresh arrays; nothing
here touches global RNG state.
"""

from dataclasses import dataclass

import numpy as np

from .matrix import make_rng

CORRUPTION_KINDS = ("laplace", "salt-pepper", "block")


@dataclass(frozen=True)
class CorruptionSpec:
    kind: str
    seed: int = 0
    delta: float = None  # laplace scale
    p: float = None  # salt-pepper fraction per column
    low: float = 0.0
    high: float = 255.0
    b: int = None  # block side
    fill: float = 550.0

    def __post_init__(self):
        if self.kind not in CORRUPTION_KINDS:
            raise ValueError(f"unknown corruption kind {self.kind!r}; expected one of {CORRUPTION_KINDS}")
        if self.kind == "laplace" and not (self.delta is not None and self.delta > 0):
            raise ValueError("laplace corruption needs delta > 0")
        if self.kind == "salt-pepper" and not (self.p is not None and 0.0 <= self.p <= 1.0):
            raise ValueError("salt-pepper corruption needs p in [0, 1]")
        if self.kind == "block" and not (self.b is not None and self.b >= 0):
            raise ValueError("block corruption needs block size b >= 0")

    @property
    def level(self):
        return {"laplace": self.delta, "salt-pepper": self.p, "block": self.b}[self.kind]


@dataclass(frozen=True)
class SyntheticLineSpec:
    n_points: int = 180
    slope: float = 0.2
    n_outliers: int = 0
    outlier_axis: str = "both"
    seed: int = 0
    x_max: float = 10.0

    def __post_init__(self):
        if not 0 <= self.n_outliers <= self.n_points:
            raise ValueError("n_outliers must be between 0 and n_points")
        if self.outlier_axis not in ("x", "y", "both"):
            raise ValueError("outlier_axis must be x, y or both")


def gen_line(spec):
    """Points on y = slope * x as the columns of a 2 x n matrix.

    Contaminated points have one coordinate replaced by U(0, 2 * x_max);
    with ``outlier_axis="both"`` the first half of them get a new x, the
    rest a new y. Returns ``(v, clean, outlier_indices)``.
    """
    rng = make_rng(spec.seed)
    x = rng.uniform(0.0, spec.x_max, spec.n_points)
    clean = np.vstack([x, spec.slope * x])
    v = clean.copy()
    idx = np.sort(rng.choice(spec.n_points, spec.n_outliers, replace=False))
    noise = rng.uniform(0.0, 2.0 * spec.x_max, spec.n_outliers)
    if spec.outlier_axis == "x":
        rows = np.zeros(spec.n_outliers, dtype=int)
    elif spec.outlier_axis == "y":
        rows = np.ones(spec.n_outliers, dtype=int)
    else:
        rows = (np.arange(spec.n_outliers) >= (spec.n_outliers + 1) // 2).astype(int)
    # shuffle which contaminated point gets which axis
    rows = rows[rng.permutation(spec.n_outliers)]
    v[rows, idx] = noise
    return v, clean, idx


def gen_lowrank(m, n, r, seed):
    """V = W H with W, H i.i.d. U(0, 1). Returns ``(v, w_true, h_true)``."""
    if not 0 < r <= min(m, n):
        raise ValueError(f"rank must be in [1, {min(m, n)}], got {r}")
    rng = make_rng(seed)
    w = rng.random((m, r))
    h = rng.random((r, n))
    return w @ h, w, h


def gen_clustered(m, n, k, seed, spread=0.1):
    """Planted rank-k data whose columns fall into k groups.

    Column j is ``W[:, c_j] * a_j + spread * W u_j`` with scale ``a_j`` in
    [0.5, 1.5] and small non-negative mixing ``u_j``. Labels are balanced.
    Returns ``(v, w_true, h_true, labels)``.
    """
    if not 0 < k <= min(m, n):
        raise ValueError(f"k must be in [1, {min(m, n)}], got {k}")
    rng = make_rng(seed)
    w = rng.random((m, k))
    labels = rng.permutation(np.arange(n) % k)
    h = spread * rng.random((k, n))
    h[labels, np.arange(n)] += rng.uniform(0.5, 1.5, n)
    return w @ h, w, h, labels


def corrupt(v, spec, image_shape=None):
    """Apply one corruption to every column of ``v``.

    Returns ``(v_corrupted, mask)`` where ``mask`` marks the entries that
    were touched (all entries for Laplace noise). Outputs are clamped at 0.
    """
    v = np.asarray(v, dtype=np.float64)
    m, n = v.shape
    rng = make_rng(spec.seed)
    out = v.copy()
    if spec.kind == "laplace":
        out = np.maximum(v + rng.laplace(0.0, spec.delta, v.shape), 0.0)
        mask = np.ones(v.shape, dtype=bool)
    elif spec.kind == "salt-pepper":
        count = int(round(spec.p * m))
        mask = np.zeros(v.shape, dtype=bool)
        for j in range(n):
            rows = rng.choice(m, count, replace=False)
            salt = rng.random(count) < 0.5
            out[rows, j] = np.where(salt, spec.high, spec.low)
            mask[rows, j] = True
    else:
        if image_shape is None:
            raise ValueError("block corruption needs image_shape=(height, width)")
        height, width = image_shape
        if height * width != m:
            raise ValueError(f"image shape {height}x{width} does not match {m} rows")
        b = spec.b
        if b > min(height, width):
            raise ValueError(f"block size {b} exceeds image {height}x{width}")
        mask = np.zeros(v.shape, dtype=bool)
        for j in range(n):
            top = rng.integers(0, height - b + 1)
            left = rng.integers(0, width - b + 1)
            img = np.zeros((height, width), dtype=bool)
            img[top:top + b, left:left + b] = True
            flat = img.ravel()
            out[flat, j] = spec.fill
            mask[:, j] = flat
        out = np.maximum(out, 0.0)
    return out, mask
