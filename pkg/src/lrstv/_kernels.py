"""Element-wise hot kernels with numba and pure-numpy implementations.

Both variants produce identical results; ``soft_threshold``, ``forward_diff``
and ``forward_diff_adjoint`` dispatch to one of them according to
:data:`lrstv._accel.USE_NUMBA`.
"""
import numpy as np

from ._accel import USE_NUMBA, njit


# --- numpy -----------------------------------------------------------------

def soft_threshold_numpy(x, delta):
    return np.maximum(x - delta, 0.0) + np.minimum(x + delta, 0.0)


def forward_diff_numpy(t, axis):
    return np.roll(t, -1, axis=axis) - t


def forward_diff_adjoint_numpy(t, axis):
    return np.roll(t, 1, axis=axis) - t


# --- numba -----------------------------------------------------------------

@njit
def _soft_threshold_flat(x, delta, out):
    for i in range(x.size):
        v = x[i]
        if v > delta:
            out[i] = v - delta
        elif v < -delta:
            out[i] = v + delta
        else:
            out[i] = 0.0


@njit
def _diff3(t, axis, sign, out):
    # sign=+1: out[i] = t[i+1] - t[i]; sign=-1: out[i] = t[i-1] - t[i]
    m, n, p = t.shape
    d = t.shape[axis]
    nb = np.empty(d, dtype=np.int64)
    for i in range(d):
        nb[i] = (i + sign) % d
    if axis == 0:
        for i in range(m):
            ii = nb[i]
            for j in range(n):
                for k in range(p):
                    out[i, j, k] = t[ii, j, k] - t[i, j, k]
    elif axis == 1:
        for i in range(m):
            for j in range(n):
                jj = nb[j]
                for k in range(p):
                    out[i, j, k] = t[i, jj, k] - t[i, j, k]
    elif sign > 0:
        # contiguous interior loops, wrap-around band handled separately
        for i in range(m):
            for j in range(n):
                for k in range(p - 1):
                    out[i, j, k] = t[i, j, k + 1] - t[i, j, k]
                out[i, j, p - 1] = t[i, j, 0] - t[i, j, p - 1]
    else:
        for i in range(m):
            for j in range(n):
                out[i, j, 0] = t[i, j, p - 1] - t[i, j, 0]
                for k in range(1, p):
                    out[i, j, k] = t[i, j, k - 1] - t[i, j, k]


def soft_threshold_numba(x, delta):
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty_like(x)
    _soft_threshold_flat(x.reshape(-1), float(delta), out.reshape(-1))
    return out


def _as3(t):
    t = np.ascontiguousarray(t, dtype=np.float64)
    if t.ndim == 2:
        return t[:, :, None]
    return t


def forward_diff_numba(t, axis):
    shape = np.shape(t)
    t3 = _as3(t)
    out = np.empty_like(t3)
    _diff3(t3, axis, 1, out)
    return out.reshape(shape)


def forward_diff_adjoint_numba(t, axis):
    shape = np.shape(t)
    t3 = _as3(t)
    out = np.empty_like(t3)
    _diff3(t3, axis, -1, out)
    return out.reshape(shape)


if USE_NUMBA:
    soft_threshold = soft_threshold_numba
    forward_diff = forward_diff_numba
    forward_diff_adjoint = forward_diff_adjoint_numba
else:
    soft_threshold = soft_threshold_numpy
    forward_diff = forward_diff_numpy
    forward_diff_adjoint = forward_diff_adjoint_numpy
