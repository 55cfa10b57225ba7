"""Value functions for TV-type regularizers and numerical rank diagnostics."""
from dataclasses import dataclass

import numpy as np

from .prox import tnn
from .tensor import diff, unfold

__all__ = [
    "RegWeights",
    "RANK_RTOL",
    "numerical_rank",
    "tv2d",
    "sstv",
    "lrstv_ani",
    "lrstv_iso",
    "average_rank",
    "bcirc",
    "RankLemmaReport",
    "check_rank_lemma",
    "GradientRankReport",
    "check_gradient_rank_bound",
    "check_theorem41",
    "singular_value_profile",
]

#: singular values above RANK_RTOL * sigma_max count towards the rank
RANK_RTOL = 1e-8

BCIRC_MAX_ENTRIES = 10**7


@dataclass(frozen=True)
class RegWeights:
    """Regularization weights.

    ``tau`` scales the l1 gradient term, ``alpha`` the tensor nuclear norm
    of each gradient map, ``w`` the per-direction difference weights and
    ``lam`` the l1 weight on the sparse component.
    """

    tau: float = 0.01
    alpha: float = 0.3
    w: tuple = (1.0, 1.0, 1.0)
    lam: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "w", tuple(float(v) for v in self.w))
        if len(self.w) != 3:
            raise ValueError("w must have three entries")
        for name in ("tau", "alpha", "lam"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if any(v < 0 for v in self.w):
            raise ValueError("w entries must be nonnegative")


def numerical_rank(a, rtol=RANK_RTOL):
    """Count singular values above ``rtol * sigma_max``; zero matrices have rank 0."""
    s = np.linalg.svd(np.asarray(a), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


def tv2d(x, variant="ani"):
    """Isotropic or anisotropic total variation of a matrix (periodic differences)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("tv2d expects a matrix")
    d1 = np.roll(x, -1, axis=0) - x
    d2 = np.roll(x, -1, axis=1) - x
    if variant == "ani":
        return float(np.sum(np.abs(d1) + np.abs(d2)))
    if variant == "iso":
        return float(np.sum(np.sqrt(d1**2 + d2**2)))
    raise ValueError(f"variant must be 'iso' or 'ani', got {variant!r}")


def sstv(t, taus):
    """Spatial-spectral TV: ``sum_n taus[n] * ||D_n t||_1``."""
    return float(sum(tn * np.sum(np.abs(diff(t, n))) for n, tn in zip((1, 2, 3), taus)))


def _per_direction(w):
    return [w.tau * wn for wn in w.w], [w.alpha] * 3


def lrstv_ani(t, w):
    """Anisotropic LRSTV: ``sum_n tau*w_n*||D_n t||_1 + alpha*tnn(D_n t)``."""
    taus, alphas = _per_direction(w)
    total = 0.0
    for n, tn, an in zip((1, 2, 3), taus, alphas):
        g = diff(t, n)
        total += tn * np.sum(np.abs(g))
        if an:
            total += an * tnn(g)
    return float(total)


def lrstv_iso(t, w):
    """Isotropic LRSTV: ``sqrt(sum_n tau_n ||D_n t||_2^2) + sum_n alpha*tnn(D_n t)``."""
    taus, alphas = _per_direction(w)
    grads = [diff(t, n) for n in (1, 2, 3)]
    smooth = np.sqrt(sum(tn * np.sum(g**2) for tn, g in zip(taus, grads)))
    low_rank = sum(an * tnn(g) for an, g in zip(alphas, grads) if an)
    return float(smooth + low_rank)


def bcirc(t):
    """Block-circulant matrix of the frontal slices, shape ``(m*p, n*p)``."""
    t = np.asarray(t, dtype=np.float64)
    m, n, p = t.shape
    if m * p * n * p > BCIRC_MAX_ENTRIES:
        raise ValueError(
            f"bcirc of a {t.shape} cube has {m * p * n * p} entries "
            f"(limit {BCIRC_MAX_ENTRIES})"
        )
    out = np.empty((m * p, n * p))
    for i in range(p):
        for j in range(p):
            out[i * m:(i + 1) * m, j * n:(j + 1) * n] = t[:, :, (i - j) % p]
    return out


def average_rank(t, tol=RANK_RTOL):
    """``rank(bcirc(t)) / p``, built explicitly (small cubes only)."""
    p = np.shape(t)[2]
    return numerical_rank(bcirc(t), tol) / p


@dataclass(frozen=True)
class RankLemmaReport:
    rank_a: int
    rank_b: int
    rank_ab: int
    inner: int
    holds: bool


def check_rank_lemma(a, b, tol=RANK_RTOL, rank=None):
    """Check ``r(A) + r(B) - k <= r(AB) <= min(r(A), r(B))``.

    ``rank`` overrides the rank function, e.g. with an exact integer one.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"incompatible shapes {a.shape} and {b.shape}")
    rank = rank or (lambda x: numerical_rank(x, tol))
    k = a.shape[1]
    ra, rb, rab = rank(a), rank(b), rank(a @ b)
    return RankLemmaReport(ra, rb, rab, k, ra + rb - k <= rab <= min(ra, rb))


@dataclass(frozen=True)
class GradientRankReport:
    """Per-mode ranks of the unfolding and of the matching gradient unfolding."""

    unfold_ranks: tuple
    gradient_ranks: tuple
    holds: tuple

    @property
    def all_hold(self):
        return all(self.holds)


def check_gradient_rank_bound(t, tol=RANK_RTOL):
    """Check ``r(L_(i)) - 1 <= r((D_i L)_(i)) <= r(L_(i))`` for every mode.

    Differencing along mode ``i`` (periodic boundary) removes at most one
    from the rank of the mode-``i`` unfolding and never adds to it.
    """
    t = np.asarray(t, dtype=np.float64)
    ur, gr, ok = [], [], []
    for mode in (1, 2, 3):
        r = numerical_rank(unfold(t, mode), tol)
        rg = numerical_rank(unfold(diff(t, mode), mode), tol)
        ur.append(r)
        gr.append(rg)
        ok.append(r - 1 <= rg <= r)
    return GradientRankReport(tuple(ur), tuple(gr), tuple(ok))


#: name used by the published interface
check_theorem41 = check_gradient_rank_bound


def singular_value_profile(t, mode, fourier=False):
    """Descending singular values of ``unfold(t, mode)``, optionally after a band FFT."""
    t = np.asarray(t, dtype=np.float64)
    if fourier:
        t = np.fft.fft(t, axis=2)
    return np.linalg.svd(unfold(t, mode), compute_uv=False)
