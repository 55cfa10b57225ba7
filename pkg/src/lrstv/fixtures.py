"""Deterministic synthetic hyperspectral cubes used in place of licensed scenes.

A fixture is a linear mixture ``sum_k A_k(x, y) s_k(lambda)`` of a few smooth
endmember spectra with piecewise-constant, axis-aligned abundance maps, so
its multilinear rank is small in every mode and its gradient maps are sparse.
"""
import numpy as np

__all__ = ["synthetic_cube", "STANDARD_SHAPE"]

#: shape of the standard denoising fixture
STANDARD_SHAPE = (32, 32, 16)


def _spectra(rng, p, k):
    lam = np.linspace(0.0, 1.0, p)
    out = np.empty((k, p))
    for i in range(k):
        centers = rng.uniform(0.0, 1.0, size=2)
        widths = rng.uniform(0.15, 0.5, size=2)
        heights = rng.uniform(0.3, 1.0, size=2)
        out[i] = 0.2 + sum(
            h * np.exp(-((lam - c) ** 2) / (2 * w**2))
            for c, w, h in zip(centers, widths, heights)
        )
    return out


def _abundance(rng, m, n, blocks):
    a = np.full((m, n), rng.uniform(0.1, 0.4))
    for _ in range(blocks):
        r0, r1 = np.sort(rng.choice(m + 1, size=2, replace=False))
        c0, c1 = np.sort(rng.choice(n + 1, size=2, replace=False))
        a[r0:r1, c0:c1] = rng.uniform(0.0, 1.0)
    return a


def synthetic_cube(shape=STANDARD_SHAPE, n_endmembers=4, blocks=3, seed=0):
    """Unit-scaled low-multilinear-rank cube with piecewise-constant structure."""
    m, n, p = shape
    rng = np.random.default_rng(seed)
    spectra = _spectra(rng, p, n_endmembers)
    cube = np.zeros((m, n, p))
    for k in range(n_endmembers):
        cube += _abundance(rng, m, n, blocks)[:, :, None] * spectra[k][None, None, :]
    lo, hi = cube.min(), cube.max()
    return (cube - lo) / (hi - lo)
