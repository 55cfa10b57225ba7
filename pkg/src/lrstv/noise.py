"""Seeded mixed-noise degradation: Gaussian, salt-and-pepper, dead lines, stripes.

Every random draw comes from a Philox generator keyed by
``(seed, stage, band)``, so each band's noise is reproducible on its own and
independent of the order in which bands are processed.
"""
import json
from dataclasses import asdict, dataclass, fields

import numpy as np

__all__ = [
    "NoiseSpec",
    "case_catalog",
    "get_case",
    "apply_noise",
    "unit_scale",
    "REFERENCE_BANDS",
]

#: band count the catalog's band intervals refer to
REFERENCE_BANDS = 160

_GAUSS, _IMPULSE, _DEADLINE, _STRIPE, _LEVELS = range(5)

STRIPE_AMPLITUDE = 0.25


@dataclass(frozen=True)
class NoiseSpec:
    """Declarative mixed-noise description.

    ``gaussian_sigma`` and ``impulse_fraction`` are either a scalar applied to
    every band or a ``[low, high]`` range from which each band draws its own
    level. Band intervals are 1-based and inclusive.
    """

    gaussian_sigma: object = 0.0
    impulse_fraction: object = 0.0
    deadline_bands: tuple = None
    deadline_count: tuple = (3, 10)
    deadline_width: tuple = (1, 3)
    stripe_bands: tuple = None
    stripe_count: tuple = (20, 40)
    seed: int = 0

    def __post_init__(self):
        for name in ("gaussian_sigma", "impulse_fraction"):
            v = getattr(self, name)
            if isinstance(v, (list, tuple)):
                if len(v) != 2 or v[0] > v[1]:
                    raise ValueError(f"{name} range must be [low, high], got {v}")
                object.__setattr__(self, name, (float(v[0]), float(v[1])))
                lo, hi = v
            else:
                object.__setattr__(self, name, float(v))
                lo = hi = v
            if lo < 0:
                raise ValueError(f"{name} must be nonnegative")
            if name == "impulse_fraction" and hi > 1:
                raise ValueError("impulse_fraction must lie in [0, 1]")
        for name in ("deadline_bands", "stripe_bands", "deadline_count",
                     "deadline_width", "stripe_count"):
            v = getattr(self, name)
            if v is None:
                continue
            v = tuple(int(x) for x in v)
            if len(v) != 2 or v[0] > v[1] or v[0] < (1 if name.endswith("bands") else 0):
                raise ValueError(f"{name} must be an increasing pair, got {v}")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "seed", int(self.seed))
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text) if isinstance(text, str) else dict(text)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown NoiseSpec fields: {sorted(unknown)}")
        return cls(**data)

    def with_seed(self, seed):
        return NoiseSpec.from_json({**asdict(self), "seed": seed})

    def rescaled(self, p, reference_bands=REFERENCE_BANDS):
        """Map band intervals from a ``reference_bands``-band cube onto ``p`` bands."""
        def scale(iv):
            if iv is None:
                return None
            lo = max(1, min(p, round(iv[0] * p / reference_bands)))
            hi = max(lo, min(p, round(iv[1] * p / reference_bands)))
            return (lo, hi)

        data = asdict(self)
        data["deadline_bands"] = scale(self.deadline_bands)
        data["stripe_bands"] = scale(self.stripe_bands)
        return NoiseSpec.from_json(data)


_STRUCTURED = dict(deadline_bands=(131, 160), stripe_bands=(111, 140))


def case_catalog():
    """The nine benchmark degradation cases (seed 0)."""
    return {
        1: NoiseSpec(gaussian_sigma=0.1),
        2: NoiseSpec(gaussian_sigma=0.2),
        3: NoiseSpec(gaussian_sigma=0.05, impulse_fraction=0.1),
        4: NoiseSpec(gaussian_sigma=0.075, impulse_fraction=0.15),
        5: NoiseSpec(gaussian_sigma=0.1, impulse_fraction=0.2),
        6: NoiseSpec(gaussian_sigma=0.2, **_STRUCTURED),
        7: NoiseSpec(gaussian_sigma=(0.0, 0.2), impulse_fraction=(0.0, 0.2), **_STRUCTURED),
        8: NoiseSpec(gaussian_sigma=0.15, impulse_fraction=0.2, **_STRUCTURED),
        9: NoiseSpec(gaussian_sigma=0.2, impulse_fraction=0.2, **_STRUCTURED),
    }


def get_case(case_id, seed=0):
    cat = case_catalog()
    if case_id not in cat:
        raise ValueError(f"unknown noise case {case_id!r}; valid cases are 1..9")
    return cat[case_id].with_seed(seed)


def unit_scale(cube):
    """Min-max scale a cube to [0, 1]; a constant cube maps to zeros."""
    cube = np.asarray(cube, dtype=np.float64)
    lo, hi = cube.min(), cube.max()
    if hi == lo:
        return np.zeros_like(cube)
    return (cube - lo) / (hi - lo)


def _rng(seed, stage, band):
    ss = np.random.SeedSequence([seed & 0xFFFFFFFF, seed >> 32, stage, band])
    return np.random.Generator(np.random.Philox(ss))


def _band_levels(value, p, seed, stage):
    if isinstance(value, tuple):
        return np.array([_rng(seed, 10 * _LEVELS + stage, b).uniform(*value) for b in range(p)])
    return np.full(p, float(value))


def _clamp(iv, p):
    if iv is None:
        return range(0)
    lo, hi = max(iv[0], 1), min(iv[1], p)
    return range(lo - 1, hi)  # 0-based, empty when the interval lies past p


def apply_noise(clean, spec):
    """Degrade a [0, 1]-scaled cube according to ``spec``.

    Order: additive Gaussian on all bands, impulse (each entry replaced by 0
    or 1 with equal odds, with probability ``impulse_fraction``), stripes
    (constant offsets on whole columns), dead lines (runs of zeroed columns).
    Dead lines go last so they stay exactly zero where the band ranges
    overlap. Band intervals beyond the cube's band count are clamped.
    """
    clean = np.asarray(clean, dtype=np.float64)
    if clean.ndim != 3:
        raise ValueError("clean must be a 3-D cube")
    if clean.size and (clean.min() < -1e-9 or clean.max() > 1 + 1e-9):
        raise ValueError("clean cube must be scaled to [0, 1] (see unit_scale)")
    m, n, p = clean.shape
    out = clean.copy()
    seed = spec.seed

    sigmas = _band_levels(spec.gaussian_sigma, p, seed, _GAUSS)
    fracs = _band_levels(spec.impulse_fraction, p, seed, _IMPULSE)

    for b in range(p):
        if sigmas[b] > 0:
            out[:, :, b] += sigmas[b] * _rng(seed, _GAUSS, b).standard_normal((m, n))
    for b in range(p):
        if fracs[b] > 0:
            rng = _rng(seed, _IMPULSE, b)
            hit = rng.random((m, n)) < fracs[b]
            salt = rng.random((m, n)) < 0.5
            out[:, :, b] = np.where(hit, salt.astype(np.float64), out[:, :, b])
    for b in _clamp(spec.stripe_bands, p):
        rng = _rng(seed, _STRIPE, b)
        count = min(n, int(rng.integers(spec.stripe_count[0], spec.stripe_count[1], endpoint=True)))
        cols = rng.choice(n, size=count, replace=False)
        offsets = rng.uniform(-STRIPE_AMPLITUDE, STRIPE_AMPLITUDE, size=count)
        out[:, cols, b] += offsets
    for b in _clamp(spec.deadline_bands, p):
        rng = _rng(seed, _DEADLINE, b)
        count = rng.integers(spec.deadline_count[0], spec.deadline_count[1], endpoint=True)
        for _ in range(count):
            width = int(rng.integers(spec.deadline_width[0], spec.deadline_width[1], endpoint=True))
            start = int(rng.integers(0, max(n - width, 0), endpoint=True))
            out[:, start:start + width, b] = 0.0
    return out
