"""Dense matrix utilities shared by every solver.

Matrices are plain 2-D ``float64`` numpy arrays. The helpers here add the
shape and finiteness checks the solvers rely on, plus seeded RNG creation.
"""

import numpy as np

from . import _kernels


class ShapeError(ValueError):
    """Raised when operands have incompatible shapes."""


def as_matrix(a, name="matrix"):
    """Return ``a`` as a finite 2-D float64 array, raising on bad input."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def matmul(a, b):
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}")
    return a @ b


def project_nonneg(a):
    # + 0.0 turns -0.0 into +0.0
    return np.maximum(np.asarray(a, dtype=np.float64), 0.0) + 0.0


def spectral_norm(a, tol=1e-9, max_iter=100):
    """Largest eigenvalue of a symmetric PSD matrix by power iteration.

    Starts from the normalised all-ones vector so the result is
    deterministic. Returns 0.0 for the zero matrix.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"spectral_norm needs a square matrix, got {a.shape}")
    return float(_kernels.power_iteration(np.ascontiguousarray(a), tol, max_iter))


def frobenius_norm(a):
    a = np.asarray(a, dtype=np.float64)
    return float(np.sqrt(np.sum(a * a)))


def normalize_columns(w):
    """Scale each column of ``w`` to unit Euclidean norm.

    Returns ``(w_unit, scales)``; multiplying row ``i`` of H by ``scales[i]``
    leaves ``W @ H`` unchanged.
    """
    w = as_matrix(w, "w")
    scales = np.sqrt(np.sum(w * w, axis=0))
    zero = np.flatnonzero(scales == 0.0)
    if zero.size:
        raise ValueError(f"cannot normalise zero columns: {zero.tolist()}")
    return w / scales, scales


def make_rng(seed, stream=None):
    """Seeded PCG64 generator.

    ``stream`` derives an independent child generator from ``(seed, stream)``,
    used when work is split across columns, trials or grid cells.
    """
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    if stream is None:
        return np.random.Generator(np.random.PCG64(seed))
    # spawn_key keeps children apart from the parent; entropy [seed, 0] would collide with seed
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(int(stream),))))
