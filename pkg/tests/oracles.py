"""Independent dense reference implementations shared by the tests."""
import numpy as np


def circulant_diff(d):
    """Dense periodic forward-difference matrix: (D x)[i] = x[i+1] - x[i]."""
    return np.roll(np.eye(d), 1, axis=1) - np.eye(d)


def vec(t):
    """Column-major vectorisation, the convention matching the Kolda unfolding."""
    return np.reshape(t, -1, order="F")


def dense_diff(dims, mode):
    """Dense matrix of diff(., mode) acting on vec(t)."""
    m, n, p = dims
    mats = [np.eye(m), np.eye(n), np.eye(p)]
    mats[mode - 1] = circulant_diff(dims[mode - 1])
    # vec(t x1 A x2 B x3 C) = (C kron B kron A) vec(t)
    return np.kron(mats[2], np.kron(mats[1], mats[0]))


def brute_prox(x, thr, lo=-3.0, hi=3.0):
    """argmin_f thr*|f| + (f - x)^2 / 2 by exhaustive grid search.

    A 1e-4 grid over [lo, hi] followed by a 1e-8 grid around the coarse
    winner, so the answer is accurate to about 1e-8.
    """
    def objective(f):
        return thr * np.abs(f) + 0.5 * (f - x) ** 2

    coarse = np.arange(lo, hi + 5e-5, 1e-4)
    best = coarse[np.argmin(objective(coarse))]
    fine = best + np.arange(-10000, 10001) * 1e-8
    return fine[np.argmin(objective(fine))]
