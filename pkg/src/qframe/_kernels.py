"""Hot loops of the complementarity search.

For Hermitian f, g the smallest eigenvalue of ``(f-x)^2 + (g-y)^2`` equals
the squared smallest singular value of the stacked matrix ``[f-x; g-y]``.
All kernels work with that singular value directly, which keeps absolute
accuracy near a vanishing minimum (a square root of an eigenvalue would
amplify rounding to ~1e-8).

Each kernel exists as a pure-numpy version (``*_numpy``) and, when numba is
installed, a compiled version (``*_numba``). The unsuffixed names pick one
according to :data:`qframe._accel.USE_NUMBA`.
"""
import numpy as np

from ._accel import HAVE_NUMBA, USE_NUMBA


# written with explicit loops so numba can compile it unchanged
def _stack(f, g, x, y):
    n = f.shape[0]
    a = np.empty((2 * n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            a[i, j] = f[i, j]
            a[n + i, j] = g[i, j]
        a[i, i] -= x
        a[n + i, i] -= y
    return a


# ---- numpy versions

def sigma_min_numpy(f, g, x, y):
    n = f.shape[0]
    eye = np.eye(n)
    a = np.vstack((f - x * eye, g - y * eye))
    return float(np.linalg.svd(a, compute_uv=False)[-1])


def grid_sigma_min_numpy(f, g, xs, ys):
    """Smallest singular value of ``[f-x; g-y]`` on the grid ``xs x ys``.

    Vectorized over ``ys``; one batched SVD per grid row.
    """
    n = f.shape[0]
    eye = np.eye(n)
    out = np.empty((len(xs), len(ys)))
    lower = g[None, :, :] - ys[:, None, None] * eye
    for i, x in enumerate(xs):
        upper = np.broadcast_to(f - x * eye, lower.shape)
        stacked = np.concatenate((upper, lower), axis=1)
        out[i] = np.linalg.svd(stacked, compute_uv=False)[:, -1]
    return out


def descent_numpy(f, g, x, y, step, min_step):
    """Coordinate descent with step halving; returns ``(x, y, sigma_min)``.

    The last sweep uses a step of at most ``min_step``. Near a cone-shaped
    minimum an axis-aligned search stalls at most ``step/sqrt(2)`` from the
    tip, so the result is within ``min_step/sqrt(2)`` of a vanishing minimum.
    """
    best = sigma_min_numpy(f, g, x, y)
    while True:
        moved = False
        for dx, dy in ((step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)):
            val = sigma_min_numpy(f, g, x + dx, y + dy)
            if val < best:
                best, x, y = val, x + dx, y + dy
                moved = True
        if not moved:
            if step <= min_step:
                break
            step *= 0.5
    return x, y, best


# ---- numba versions (None without numba)

sigma_min_numba = grid_sigma_min_numba = descent_numba = None

if HAVE_NUMBA:
    from numba import njit

    _stack_jit = njit(cache=True)(_stack)

    @njit(cache=True, nogil=True)
    def sigma_min_numba(f, g, x, y):
        s = np.linalg.svd(_stack_jit(f, g, x, y), full_matrices=False)[1]
        return s[s.shape[0] - 1]

    @njit(cache=True, nogil=True)
    def grid_sigma_min_numba(f, g, xs, ys):
        out = np.empty((xs.shape[0], ys.shape[0]))
        for i in range(xs.shape[0]):
            for j in range(ys.shape[0]):
                out[i, j] = sigma_min_numba(f, g, xs[i], ys[j])
        return out

    @njit(cache=True, nogil=True)
    def descent_numba(f, g, x, y, step, min_step):
        best = sigma_min_numba(f, g, x, y)
        while True:
            moved = False
            for k in range(4):
                dx = step if k == 0 else (-step if k == 1 else 0.0)
                dy = step if k == 2 else (-step if k == 3 else 0.0)
                val = sigma_min_numba(f, g, x + dx, y + dy)
                if val < best:
                    best, x, y = val, x + dx, y + dy
                    moved = True
            if not moved:
                if step <= min_step:
                    break
                step *= 0.5
        return x, y, best

if USE_NUMBA:
    def sigma_min(f, g, x, y):
        return float(sigma_min_numba(f, g, float(x), float(y)))

    def grid_sigma_min(f, g, xs, ys):
        return grid_sigma_min_numba(f, g, np.asarray(xs, dtype=float), np.asarray(ys, dtype=float))

    def descent(f, g, x, y, step, min_step):
        x, y, best = descent_numba(f, g, float(x), float(y), float(step), float(min_step))
        return float(x), float(y), float(best)
else:
    sigma_min = sigma_min_numpy
    grid_sigma_min = grid_sigma_min_numpy
    descent = descent_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
