"""Dense third-order tensor algebra.

Cubes are ``numpy`` float arrays of shape ``(m, n, p)``: rows, columns,
spectral bands. Modes are numbered 1, 2, 3 as in the usual tensor notation.

Unfoldings follow the Kolda-Bader convention: the mode-k fibers become the
columns of the unfolding, and the remaining indices are laid out in
ascending mode order with the earlier one varying fastest. For a cube ``X``
of shape ``(m, n, p)`` this gives::

    unfold(X, 1)[i, j + k*n] == X[i, j, k]
    unfold(X, 2)[j, i + k*m] == X[i, j, k]
    unfold(X, 3)[k, i + j*m] == X[i, j, k]

All finite differences use periodic boundaries, so every difference operator
is circulant and is diagonalised by the 3-D DFT.
"""
import numpy as np

from . import _kernels

__all__ = [
    "check_cube",
    "unfold",
    "fold",
    "mode_product",
    "diff",
    "diff_adjoint",
    "diff_kernel",
    "fft_mode3",
    "ifft_mode3",
    "fftn",
    "ifftn",
    "SymmetryError",
]

#: imaginary residual above which an inverse FFT is rejected
IMAG_TOL = 1e-6


class SymmetryError(ValueError):
    """Inverse FFT produced a non-negligible imaginary part."""


def _axis(mode):
    if mode not in (1, 2, 3):
        raise ValueError(f"mode must be 1, 2 or 3, got {mode!r}")
    return mode - 1


def check_cube(t, name="cube"):
    """Return ``t`` as a float64 3-D array, rejecting bad shapes and non-finite values."""
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 3:
        raise ValueError(f"{name} must be 3-D (m, n, p), got shape {t.shape}")
    if min(t.shape) < 1:
        raise ValueError(f"{name} has an empty dimension: {t.shape}")
    if not np.all(np.isfinite(t)):
        raise ValueError(f"{name} contains NaN or Inf")
    return t


def unfold(t, mode):
    """Mode-``mode`` matricization of a 3-D array (complex input allowed)."""
    ax = _axis(mode)
    t = np.asarray(t)
    return np.reshape(np.moveaxis(t, ax, 0), (t.shape[ax], -1), order="F")


def fold(mat, mode, dims):
    """Inverse of :func:`unfold`.

    Parameters
    ----------
    mat : ndarray
        Matrix of shape ``(dims[mode-1], prod(other dims))``.
    mode : int
        1, 2 or 3.
    dims : tuple of int
        Target cube shape ``(m, n, p)``.
    """
    ax = _axis(mode)
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3:
        raise ValueError(f"dims must have length 3, got {dims}")
    mat = np.asarray(mat)
    rest = [d for i, d in enumerate(dims) if i != ax]
    expected = (dims[ax], rest[0] * rest[1])
    if mat.shape != expected:
        raise ValueError(
            f"cannot fold a {mat.shape} matrix along mode {mode} into {dims}; "
            f"expected {expected}"
        )
    t = np.reshape(mat, (dims[ax], rest[0], rest[1]), order="F")
    return np.moveaxis(t, 0, ax)


def mode_product(t, mat, mode):
    """Mode-k product ``t x_k mat``: multiply every mode-k fiber by ``mat``."""
    ax = _axis(mode)
    t = np.asarray(t)
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[1] != t.shape[ax]:
        raise ValueError(
            f"matrix of shape {mat.shape} does not match size {t.shape[ax]} "
            f"of mode {mode}"
        )
    # tensordot contracts mat's columns with axis `ax`, new axis lands first
    out = np.tensordot(mat, t, axes=([1], [ax]))
    return np.moveaxis(out, 0, ax)


def diff(t, mode):
    """Periodic forward difference along ``mode``.

    ``diff(t, 1)[i, j, k] = t[(i+1) % m, j, k] - t[i, j, k]``, and likewise
    for columns (mode 2) and bands (mode 3).
    """
    return _kernels.forward_diff(np.asarray(t, dtype=np.float64), _axis(mode))


def diff_adjoint(t, mode):
    """Adjoint of :func:`diff`, i.e. the negative periodic backward difference."""
    return _kernels.forward_diff_adjoint(np.asarray(t, dtype=np.float64), _axis(mode))


def diff_kernel(dims, mode):
    """Convolution kernel ``d`` with ``diff(x, mode) == d (*) x`` (circular).

    ``fftn(d)`` gives the eigenvalues of the circulant difference operator.
    """
    ax = _axis(mode)
    d = np.zeros(tuple(dims))
    idx = [0, 0, 0]
    d[tuple(idx)] -= 1.0
    idx[ax] = dims[ax] - 1
    d[tuple(idx)] += 1.0
    return d


def _real_part(c, what):
    scale = max(1.0, float(np.max(np.abs(c.real))) if c.size else 1.0)
    resid = float(np.max(np.abs(c.imag))) if c.size else 0.0
    if resid > IMAG_TOL * scale:
        raise SymmetryError(
            f"{what}: imaginary residual {resid:.3e} exceeds tolerance; "
            "input lacks conjugate symmetry"
        )
    return np.ascontiguousarray(c.real)


def fft_mode3(t):
    """Unnormalised DFT along the band axis."""
    return np.fft.fft(np.asarray(t), axis=2)


def ifft_mode3(c):
    """Inverse of :func:`fft_mode3` (carries the 1/p factor); returns a real cube."""
    return _real_part(np.fft.ifft(np.asarray(c), axis=2), "ifft_mode3")


def fftn(t):
    """Unnormalised 3-D DFT."""
    return np.fft.fftn(np.asarray(t), axes=(0, 1, 2))


def ifftn(c):
    """Inverse of :func:`fftn`; returns a real cube."""
    return _real_part(np.fft.ifftn(np.asarray(c), axes=(0, 1, 2)), "ifftn")
