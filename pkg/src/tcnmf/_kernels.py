"""Hot loops: power iteration and the batched OGM solver for WNLS columns.

Two implementations of every kernel live here. The numba versions are
compiled with ``@njit`` and parallelise over independent columns with
``prange``; each column is reduced sequentially so results do not depend
on the thread count. The numpy versions vectorise across columns and are
used when numba is unavailable or ``RNMF_DISABLE_NUMBA`` is set.

The two paths run the same algorithm but sum in different orders, so
they agree to rounding, not bitwise.
"""

import math

import numpy as np

from . import _env

try:
    if _env.NUMBA_DISABLED:
        raise ImportError("numba disabled by RNMF_DISABLE_NUMBA")
    import numba
    from numba import njit, prange

    # workqueue ships with numba itself; avoids probing for TBB/OpenMP
    numba.config.THREADING_LAYER = "workqueue"

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

# exit codes stored per column
CONVERGED = 0
MAX_ITER = 1
SKIPPED = 2  # Lipschitz constant is zero: every weight in the column vanished
REVERTED = 3  # iterate was worse than the warm start; warm start returned


# ---------------------------------------------------------------------------
# numpy path
# ---------------------------------------------------------------------------

def power_iteration_numpy(a, tol=1e-9, max_iter=100):
    n = a.shape[0]
    if n == 0:
        return 0.0
    x = np.full(n, 1.0 / math.sqrt(n))
    lam = 0.0
    for _ in range(max_iter):
        y = a @ x
        ny = math.sqrt(float(y @ y))
        if ny == 0.0:
            return 0.0
        x = y / ny
        if abs(ny - lam) <= tol * ny:
            return ny
        lam = ny
    return lam


def _power_batch(gram, tol, max_iter):
    n, r, _ = gram.shape
    x = np.full((n, r), 1.0 / math.sqrt(r))
    lam = np.zeros(n)
    active = np.ones(n, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        y = np.einsum("jrs,js->jr", gram[idx], x[idx])
        ny = np.sqrt(np.einsum("jr,jr->j", y, y))
        zero = ny == 0.0
        safe = np.where(zero, 1.0, ny)
        x[idx] = y / safe[:, None]
        done = zero | (np.abs(ny - lam[idx]) <= tol * ny)
        lam[idx] = np.where(zero, 0.0, ny)
        active[idx[done]] = False
    return lam


def _proj_grad_norm(h, g):
    pg = np.where(h > 0.0, g, np.minimum(g, 0.0))
    return np.sqrt(np.einsum("jr,jr->j", pg, pg))


def solve_columns_numpy(basis, weights, targets, warm, eps1=1e-6, floor=1e-3,
                        max_iter=500, pi_tol=1e-9, pi_max_iter=100):
    basis = np.ascontiguousarray(basis, dtype=np.float64)
    n = weights.shape[1]
    gram = np.einsum("ir,ij,is->jrs", basis, weights, basis)
    rhs = np.einsum("ir,ij->jr", basis, weights * targets)
    lips = _power_batch(gram, pi_tol, pi_max_iter)

    h0 = np.array(warm.T, dtype=np.float64)
    h = h0.copy()
    z = h0.copy()
    alpha = np.ones(n)
    iters = np.zeros(n, dtype=np.int64)
    status = np.full(n, MAX_ITER, dtype=np.int64)

    g0 = np.einsum("jrs,js->jr", gram, h0) - rhs
    pg0 = _proj_grad_norm(h0, g0)
    pgf = pg0.copy()
    thresh = max(eps1, floor) * pg0

    skipped = lips == 0.0
    status[skipped] = SKIPPED
    stationary = (~skipped) & (pg0 == 0.0)
    status[stationary] = CONVERGED
    active = ~(skipped | stationary)
    safe_l = np.where(lips > 0.0, lips, 1.0)

    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        gi = gram[idx]
        zi = z[idx]
        hi_prev = h[idx]
        gz = np.einsum("jrs,js->jr", gi, zi) - rhs[idx]
        hi = np.maximum(zi - gz / safe_l[idx, None], 0.0)
        a_old = alpha[idx]
        a_new = (1.0 + np.sqrt(4.0 * a_old * a_old + 1.0)) / 2.0
        z[idx] = hi + ((a_old - 1.0) / a_new)[:, None] * (hi - hi_prev)
        h[idx] = hi
        alpha[idx] = a_new
        iters[idx] += 1
        gh = np.einsum("jrs,js->jr", gi, hi) - rhs[idx]
        norm = _proj_grad_norm(hi, gh)
        pgf[idx] = norm
        done = norm <= thresh[idx]
        status[idx[done]] = CONVERGED
        active[idx[done]] = False

    # never hand back something worse than the warm start
    f0 = 0.5 * np.einsum("jr,jr->j", h0, np.einsum("jrs,js->jr", gram, h0)) \
        - np.einsum("jr,jr->j", rhs, h0)
    f1 = 0.5 * np.einsum("jr,jr->j", h, np.einsum("jrs,js->jr", gram, h)) \
        - np.einsum("jr,jr->j", rhs, h)
    worse = (~skipped) & (f1 > f0)
    h[worse] = h0[worse]
    status[worse] = REVERTED
    h[skipped] = h0[skipped]
    return h.T.copy(), iters, status, pg0, pgf, lips


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def power_iteration_numba(a, tol=1e-9, max_iter=100):
        n = a.shape[0]
        if n == 0:
            return 0.0
        x = np.empty(n)
        y = np.empty(n)
        for i in range(n):
            x[i] = 1.0 / math.sqrt(n)
        lam = 0.0
        for _ in range(max_iter):
            ny = 0.0
            for i in range(n):
                s = 0.0
                for k in range(n):
                    s += a[i, k] * x[k]
                y[i] = s
                ny += s * s
            ny = math.sqrt(ny)
            if ny == 0.0:
                return 0.0
            for i in range(n):
                x[i] = y[i] / ny
            if abs(ny - lam) <= tol * ny:
                return ny
            lam = ny
        return lam

    @njit(cache=True, nogil=True)
    def _grad(gram, rhs, x, out):
        r = x.shape[0]
        for p in range(r):
            s = 0.0
            for q in range(r):
                s += gram[p, q] * x[q]
            out[p] = s - rhs[p]

    @njit(cache=True, nogil=True)
    def _pg_norm(h, g):
        s = 0.0
        for p in range(h.shape[0]):
            v = g[p]
            if h[p] <= 0.0 and v > 0.0:
                v = 0.0
            s += v * v
        return math.sqrt(s)

    @njit(cache=True, nogil=True)
    def _quad(gram, rhs, x):
        r = x.shape[0]
        f = 0.0
        for p in range(r):
            s = 0.0
            for q in range(r):
                s += gram[p, q] * x[q]
            f += 0.5 * x[p] * s - rhs[p] * x[p]
        return f

    @njit(cache=True, nogil=True)
    def _solve_one(basis, weights, targets, warm, j, eps1, floor, max_iter,
                   pi_tol, pi_max_iter, out, iters, status, pg0, pgf, lips):
        m, r = basis.shape
        gram = np.zeros((r, r))
        rhs = np.zeros(r)
        for i in range(m):
            d = weights[i, j]
            if d == 0.0:
                continue
            dv = d * targets[i, j]
            for p in range(r):
                wp = d * basis[i, p]
                rhs[p] += basis[i, p] * dv
                for q in range(r):
                    gram[p, q] += wp * basis[i, q]
        lip = power_iteration_numba(gram, pi_tol, pi_max_iter)
        lips[j] = lip

        h0 = np.empty(r)
        for p in range(r):
            h0[p] = warm[p, j]
        g = np.empty(r)
        _grad(gram, rhs, h0, g)
        n0 = _pg_norm(h0, g)
        pg0[j] = n0
        pgf[j] = n0
        if lip == 0.0:
            for p in range(r):
                out[p, j] = h0[p]
            status[j] = SKIPPED
            return
        if n0 == 0.0:
            for p in range(r):
                out[p, j] = h0[p]
            status[j] = CONVERGED
            return

        thresh = max(eps1, floor) * n0
        h = h0.copy()
        z = h0.copy()
        hn = np.empty(r)
        alpha = 1.0
        st = MAX_ITER
        k = 0
        while k < max_iter:
            _grad(gram, rhs, z, g)
            for p in range(r):
                v = z[p] - g[p] / lip
                hn[p] = v if v > 0.0 else 0.0
            a_new = (1.0 + math.sqrt(4.0 * alpha * alpha + 1.0)) / 2.0
            c = (alpha - 1.0) / a_new
            for p in range(r):
                z[p] = hn[p] + c * (hn[p] - h[p])
                h[p] = hn[p]
            alpha = a_new
            k += 1
            _grad(gram, rhs, h, g)
            nk = _pg_norm(h, g)
            pgf[j] = nk
            if nk <= thresh:
                st = CONVERGED
                break
        iters[j] = k
        if _quad(gram, rhs, h) > _quad(gram, rhs, h0):
            h[:] = h0
            st = REVERTED
        status[j] = st
        for p in range(r):
            out[p, j] = h[p]

    @njit(cache=True, parallel=True)
    def _solve_columns_numba(basis, weights, targets, warm, eps1, floor,
                             max_iter, pi_tol, pi_max_iter):
        r = basis.shape[1]
        n = weights.shape[1]
        out = np.empty((r, n))
        iters = np.zeros(n, dtype=np.int64)
        status = np.zeros(n, dtype=np.int64)
        pg0 = np.zeros(n)
        pgf = np.zeros(n)
        lips = np.zeros(n)
        for j in prange(n):
            _solve_one(basis, weights, targets, warm, j, eps1, floor, max_iter,
                       pi_tol, pi_max_iter, out, iters, status, pg0, pgf, lips)
        return out, iters, status, pg0, pgf, lips

    def solve_columns_numba(basis, weights, targets, warm, eps1=1e-6, floor=1e-3,
                            max_iter=500, pi_tol=1e-9, pi_max_iter=100):
        return _solve_columns_numba(
            np.ascontiguousarray(basis, dtype=np.float64),
            np.ascontiguousarray(weights, dtype=np.float64),
            np.ascontiguousarray(targets, dtype=np.float64),
            np.ascontiguousarray(warm, dtype=np.float64),
            float(eps1), float(floor), int(max_iter), float(pi_tol), int(pi_max_iter),
        )

    def set_threads(n):
        n = min(n, numba.config.NUMBA_NUM_THREADS) if n > 0 else numba.config.NUMBA_NUM_THREADS
        numba.set_num_threads(n)

    def current_threads():
        return numba.get_num_threads()

    solve_columns = solve_columns_numba
    power_iteration = power_iteration_numba
    BACKEND = "numba"
else:
    def set_threads(n):
        pass

    def current_threads():
        return 1

    solve_columns = solve_columns_numpy
    power_iteration = power_iteration_numpy
    BACKEND = "numpy"

set_threads(_env.THREADS)
