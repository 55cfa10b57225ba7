"""Proximal operators and Tucker approximation.

The tensor nuclear norm here is the t-SVD one: the mean over Fourier slices
(DFT along bands) of the slice nuclear norms. Its proximal operator is a
per-slice singular value thresholding in the Fourier domain with the same
threshold ``tau``.
"""
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .tensor import mode_product, unfold

__all__ = [
    "TuckerFactors",
    "soft_threshold",
    "svt",
    "t_svt",
    "tnn",
    "tubal_rank",
    "hosvd",
    "hooi",
    "tucker_reconstruct",
]


def soft_threshold(x, delta):
    """Element-wise shrinkage ``sign(x) * max(|x| - delta, 0)``."""
    if delta < 0:
        raise ValueError(f"threshold must be nonnegative, got {delta}")
    return _kernels.soft_threshold(np.asarray(x, dtype=np.float64), delta)


def svt(a, tau):
    """Singular value thresholding, the prox of ``tau * ||.||_*``."""
    if tau < 0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    a = np.asarray(a)
    if tau == 0:
        return a.copy()
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    s = np.maximum(s - tau, 0.0)
    return (u * s) @ vh


def _half_spectrum(t):
    # rfft keeps frequencies 0..p//2; the rest are complex conjugates
    return np.fft.rfft(t, axis=2)


def _slice_weights(p):
    """How many full-spectrum slices each rfft slice stands for."""
    nf = p // 2 + 1
    w = np.full(nf, 2.0)
    w[0] = 1.0
    if p % 2 == 0:
        w[-1] = 1.0
    return w


def t_svt_with_norm(t, tau):
    """Like :func:`t_svt` but also return the tensor nuclear norm of the result."""
    if tau < 0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    t = np.asarray(t, dtype=np.float64)
    p = t.shape[2]
    spec = np.moveaxis(_half_spectrum(t), 2, 0)  # (nf, m, n)
    u, s, vh = np.linalg.svd(spec, full_matrices=False)
    s = np.maximum(s - tau, 0.0)
    out_spec = np.matmul(u * s[:, None, :], vh)
    # DC and Nyquist slices are real for real input; drop round-off imag
    out_spec[0] = out_spec[0].real
    if p % 2 == 0:
        out_spec[-1] = out_spec[-1].real
    out = np.fft.irfft(np.moveaxis(out_spec, 0, 2), n=p, axis=2)
    norm = float(np.sum(_slice_weights(p) * s.sum(axis=1)) / p)
    return np.ascontiguousarray(out), norm


def t_svt(t, tau):
    """Proximal operator of ``tau * tnn`` for a real 3-D array.

    Conjugate frequency pairs share one SVD, so the output is real by
    construction.
    """
    return t_svt_with_norm(t, tau)[0]


def _fourier_singular_values(t):
    t = np.asarray(t, dtype=np.float64)
    spec = np.moveaxis(_half_spectrum(t), 2, 0)
    return np.linalg.svd(spec, compute_uv=False)  # (nf, min(m, n))


def tnn(t):
    """Tensor nuclear norm: ``(1/p) * sum_k ||fft_mode3(t)[:, :, k]||_*``."""
    t = np.asarray(t, dtype=np.float64)
    p = t.shape[2]
    s = _fourier_singular_values(t)
    return float(np.sum(_slice_weights(p) * s.sum(axis=1)) / p)


def tubal_rank(t, tol=1e-8):
    """Number of singular tubes with some Fourier-slice singular value above ``tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = _fourier_singular_values(t)
    return int(np.count_nonzero(np.any(s > tol, axis=0)))


@dataclass
class TuckerFactors:
    """Core tensor with column-orthonormal factor matrices.

    ``fit_history`` holds ``||core||_F`` after initialisation and after each
    HOOI sweep.
    """

    core: np.ndarray
    factors: tuple
    fit_history: list = field(default_factory=list)

    @property
    def ranks(self):
        return self.core.shape


def tucker_reconstruct(f):
    """``core x1 U1 x2 U2 x3 U3``."""
    out = f.core
    for k, u in enumerate(f.factors, start=1):
        out = mode_product(out, u, k)
    return out


def _leading_left_vectors(mat, r):
    u, _, _ = np.linalg.svd(mat, full_matrices=False)
    return u[:, :r]


def _check_ranks(shape, ranks):
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != 3:
        raise ValueError(f"ranks must be a triple, got {ranks}")
    for k, (r, d) in enumerate(zip(ranks, shape), start=1):
        if not 1 <= r <= d:
            raise ValueError(f"rank {r} for mode {k} outside [1, {d}]")
    return ranks


def _project_core(t, factors):
    core = t
    for k, u in enumerate(factors, start=1):
        core = mode_product(core, u.T, k)
    return core


def hosvd(t, ranks):
    """Truncated higher-order SVD."""
    t = np.asarray(t, dtype=np.float64)
    ranks = _check_ranks(t.shape, ranks)
    factors = tuple(_leading_left_vectors(unfold(t, k), r) for k, r in zip((1, 2, 3), ranks))
    core = _project_core(t, factors)
    return TuckerFactors(core, factors, [float(np.linalg.norm(core))])


def hooi(t, ranks, max_sweeps=3, tol=1e-6, init=None):
    """Higher-order orthogonal iteration for a rank-``ranks`` Tucker approximation.

    Starts from the truncated HOSVD (or from the factors of ``init``) and
    alternately refits each factor as the leading left singular vectors of
    the tensor projected on the other two factors. Stops once the core norm
    improves by less than ``tol`` (relative to ``||t||_F``) or after
    ``max_sweeps`` sweeps.
    """
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be >= 1")
    t = np.asarray(t, dtype=np.float64)
    ranks = _check_ranks(t.shape, ranks)
    if init is None:
        init = hosvd(t, ranks)
    else:
        if tuple(u.shape[1] for u in init.factors) != ranks:
            raise ValueError("init factors do not match the requested ranks")
        core = _project_core(t, init.factors)
        init = TuckerFactors(core, init.factors, [float(np.linalg.norm(core))])
    if ranks == t.shape:
        return init
    factors = list(init.factors)
    history = list(init.fit_history)
    tnorm = float(np.linalg.norm(t)) or 1.0

    core = init.core
    for _ in range(max_sweeps):
        for k in range(3):
            y = t
            for j in range(3):
                if j != k:
                    y = mode_product(y, factors[j].T, j + 1)
            factors[k] = _leading_left_vectors(unfold(y, k + 1), ranks[k])
        core = mode_product(y, factors[2].T, 3)
        fit = float(np.linalg.norm(core))
        prev = history[-1]
        history.append(fit)
        if (fit - prev) / tnorm < tol:
            break
    return TuckerFactors(core, tuple(factors), history)
