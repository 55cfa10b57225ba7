"""Gradient-map spectra and batch checks of the rank inequalities."""
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .fixtures import synthetic_cube
from .regularizers import RANK_RTOL, check_gradient_rank_bound, check_rank_lemma, singular_value_profile
from .tensor import diff, mode_product

__all__ = [
    "gradient_spectra",
    "spectra_records",
    "effective_rank",
    "gradient_histogram",
    "exact_rank",
    "random_low_rank_cube",
    "VerificationReport",
    "verify_rank_properties",
]


def gradient_spectra(cube):
    """Normalised singular values of each gradient map's unfolding.

    Returns ``{(direction, domain): values}`` for directions 1..3 and domains
    ``"plain"`` / ``"fourier"``. Direction ``n`` uses ``unfold(diff(cube, n), n)``;
    the Fourier variant applies the band FFT first. Each profile is divided
    by its largest value (an all-zero profile stays zero).
    """
    cube = np.asarray(cube, dtype=np.float64)
    out = {}
    for n in (1, 2, 3):
        g = diff(cube, n)
        for domain, fourier in (("plain", False), ("fourier", True)):
            s = singular_value_profile(g, n, fourier=fourier)
            out[(n, domain)] = s / s[0] if s[0] > 0 else s
    return out


def spectra_records(spectra):
    """Flatten :func:`gradient_spectra` output into CSV-ready rows."""
    rows = []
    for (n, domain), values in sorted(spectra.items()):
        rows.extend(
            {"direction": n, "domain": domain, "index": i + 1, "value": float(v)}
            for i, v in enumerate(values)
        )
    return rows


def effective_rank(normalised, threshold=0.01):
    """Number of normalised singular values at or above ``threshold``."""
    return int(np.count_nonzero(np.asarray(normalised) >= threshold))


def gradient_histogram(cube, bins=64):
    """Histogram of each direction's gradient values: ``{n: (counts, edges)}``."""
    return {n: np.histogram(diff(cube, n), bins=bins) for n in (1, 2, 3)}


def exact_rank(mat):
    """Rank of an integer matrix by exact Gaussian elimination over the rationals."""
    rows = [[Fraction(int(v)) for v in row] for row in np.asarray(mat)]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for c in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][c] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pv = rows[rank][c]
        for r in range(rank + 1, len(rows)):
            if rows[r][c] != 0:
                f = rows[r][c] / pv
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


def _thin_product(rng, rows, cols, rank):
    """Integer matrix of rank at most ``rank`` as a product of thin factors."""
    if rank == 0:
        return np.zeros((rows, cols), dtype=np.int64)
    a = rng.integers(-3, 4, size=(rows, rank))
    b = rng.integers(-3, 4, size=(rank, cols))
    return a @ b


def random_low_rank_cube(rng, shape, ranks):
    """Random orthonormal factors applied to a random core."""
    core = rng.standard_normal(ranks)
    out = core
    for k, (d, r) in enumerate(zip(shape, ranks), start=1):
        q, _ = np.linalg.qr(rng.standard_normal((d, r)))
        out = mode_product(out, q, k)
    return out


@dataclass
class VerificationReport:
    lemma_trials: int
    lemma_passed: int
    theorem_trials: int
    theorem_passed: int
    seed: int

    @property
    def all_passed(self):
        return self.lemma_passed == self.lemma_trials and self.theorem_passed == self.theorem_trials

    def to_dict(self):
        return {**asdict(self), "all_passed": self.all_passed}


def verify_rank_properties(trials, seed=0, theorem_trials=None, max_inner=12):
    """Check the product-rank inequality and the gradient-rank bound on random instances.

    The product-rank check draws integer matrices ``A`` (m x k) and ``B``
    (k x n) with ``k <= max_inner`` and planted ranks, and uses exact
    rational rank. The gradient check draws low-multilinear-rank cubes
    (plus the constant cube as first instance) and compares numerical ranks.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    theorem_trials = trials if theorem_trials is None else theorem_trials
    root = np.random.SeedSequence(seed)
    lemma_ss, theorem_ss = root.spawn(2)

    lemma_ok = 0
    for ss in lemma_ss.spawn(trials):
        rng = np.random.default_rng(ss)
        k = int(rng.integers(1, max_inner + 1))
        m = int(rng.integers(1, 13))
        n = int(rng.integers(1, 13))
        a = _thin_product(rng, m, k, int(rng.integers(0, min(m, k) + 1)))
        b = _thin_product(rng, k, n, int(rng.integers(0, min(k, n) + 1)))
        if check_rank_lemma(a, b, rank=exact_rank).holds:
            lemma_ok += 1

    theorem_ok = 0
    for i, ss in enumerate(theorem_ss.spawn(theorem_trials)):
        rng = np.random.default_rng(ss)
        if i == 0:
            cube = np.full((5, 4, 3), 0.7)
        else:
            shape = tuple(int(v) for v in rng.integers(3, 9, size=3))
            ranks = tuple(int(rng.integers(1, d + 1)) for d in shape)
            cube = random_low_rank_cube(rng, shape, ranks)
        if check_gradient_rank_bound(cube, RANK_RTOL).all_hold:
            theorem_ok += 1

    return VerificationReport(trials, lemma_ok, theorem_trials, theorem_ok, seed)


def fourier_rank_comparison(seed, shape=(32, 32, 16), threshold=0.01):
    """1%-threshold effective ranks ``{n: (plain, fourier)}`` on a synthetic fixture."""
    spectra = gradient_spectra(synthetic_cube(shape, seed=seed))
    return {
        n: (effective_rank(spectra[(n, "plain")], threshold),
            effective_rank(spectra[(n, "fourier")], threshold))
        for n in (1, 2, 3)
    }
