import json

import numpy as np
import pytest

from lrstv.metrics import psnr
from lrstv.noise import NoiseSpec, apply_noise, case_catalog, get_case, unit_scale

GRAY = np.full((64, 64, 8), 0.5)


def test_catalog_levels():
    cat = case_catalog()
    assert sorted(cat) == list(range(1, 10))
    assert cat[1].gaussian_sigma == 0.1 and cat[1].impulse_fraction == 0
    assert (cat[5].gaussian_sigma, cat[5].impulse_fraction) == (0.1, 0.2)
    assert (cat[3].gaussian_sigma, cat[3].impulse_fraction) == (0.05, 0.1)
    assert (cat[4].gaussian_sigma, cat[4].impulse_fraction) == (0.075, 0.15)
    c9 = cat[9]
    assert (c9.gaussian_sigma, c9.impulse_fraction) == (0.2, 0.2)
    assert c9.deadline_bands == (131, 160) and c9.stripe_bands == (111, 140)
    assert cat[7].gaussian_sigma == (0.0, 0.2) and cat[7].impulse_fraction == (0.0, 0.2)
    for k in (1, 2, 3, 4, 5):
        assert cat[k].deadline_bands is None and cat[k].stripe_bands is None
    with pytest.raises(ValueError, match="1..9"):
        get_case(10)


@pytest.mark.parametrize("case,want", [(1, 20.0), (2, 13.98)])
def test_gaussian_psnr_anchor(case, want):
    noisy = apply_noise(GRAY, get_case(case, seed=3))
    assert abs(psnr(GRAY, noisy) - want) <= 0.15


def test_impulse_fraction():
    spec = NoiseSpec(impulse_fraction=0.1, seed=5)
    noisy = apply_noise(GRAY, spec)
    altered = noisy != GRAY
    assert abs(altered.mean() - 0.1) <= 0.01
    assert set(np.unique(noisy[altered])) <= {0.0, 1.0}
    # roughly half salt, half pepper
    assert abs((noisy[altered] == 1.0).mean() - 0.5) < 0.05


def test_impulse_values_exact_after_gaussian():
    spec = NoiseSpec(gaussian_sigma=0.1, impulse_fraction=0.2, seed=1)
    noisy = apply_noise(GRAY, spec)
    exact = (noisy == 0.0) | (noisy == 1.0)
    assert abs(exact.mean() - 0.2) <= 0.01


def test_gaussian_moments():
    base = np.full((128, 128, 64), 0.5)
    n = base.size
    assert n >= 10**6
    sigma = 0.1
    e = apply_noise(base, NoiseSpec(gaussian_sigma=sigma, seed=9)) - base
    assert abs(e.mean()) < 3 * sigma / np.sqrt(n)
    assert abs(e.std() / sigma - 1) < 0.02


def test_deterministic_and_seed_sensitive():
    spec = get_case(9, seed=42).rescaled(8)
    a = apply_noise(GRAY, spec)
    b = apply_noise(GRAY, spec)
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, apply_noise(GRAY, spec.with_seed(43)))


def test_zero_spec_is_identity(rng):
    clean = rng.uniform(size=(5, 6, 4))
    np.testing.assert_array_equal(apply_noise(clean, NoiseSpec()), clean)


def test_per_band_draws_do_not_depend_on_band_count():
    spec = get_case(7, seed=11)
    full = apply_noise(np.full((16, 16, 8), 0.5), spec)
    head = apply_noise(np.full((16, 16, 4), 0.5), spec)
    np.testing.assert_array_equal(full[:, :, :4], head)


def test_structured_noise_bands_and_values():
    clean = np.full((20, 50, 12), 0.5)
    spec = NoiseSpec(deadline_bands=(9, 12), stripe_bands=(5, 10), seed=2)
    noisy = apply_noise(clean, spec)
    # untouched bands
    np.testing.assert_array_equal(noisy[:, :, :4], clean[:, :, :4])
    for b in range(12):
        band = noisy[:, :, b]
        cols_changed = np.flatnonzero(np.any(band != 0.5, axis=0))
        # every change spans whole columns
        assert np.all(np.ptp(band[:, cols_changed], axis=0) == 0)
        if 4 <= b <= 7:  # stripes only
            assert 20 <= cols_changed.size <= 40
            assert np.all(np.abs(band[0, cols_changed] - 0.5) <= 0.25)
        if b >= 8:  # dead lines: 3..10 runs of width 1..3
            dead = np.flatnonzero(np.all(band == 0.0, axis=0))
            assert 1 <= dead.size <= 30
        if b >= 10:  # dead lines only
            assert set(np.unique(band)) == {0.0, 0.5}


def test_deadlines_stay_zero_where_stripes_overlap():
    clean = np.full((10, 40, 4), 0.5)
    spec = NoiseSpec(deadline_bands=(1, 4), stripe_bands=(1, 4), stripe_count=(40, 40), seed=8)
    noisy = apply_noise(clean, spec)
    for b in range(4):
        dead = np.all(noisy[:, :, b] == 0.0, axis=0)
        assert dead.sum() >= 3


def test_band_intervals_are_clamped():
    spec = get_case(9, seed=0)
    small = np.full((12, 12, 8), 0.5)
    # the catalog refers to 160 bands; on 8 bands the intervals fall off the end
    noisy = apply_noise(small, spec.with_seed(0))
    assert noisy.shape == small.shape
    r = spec.rescaled(16)
    assert r.deadline_bands == (13, 16) and r.stripe_bands == (11, 14)
    assert spec.rescaled(160) == spec


def test_per_band_ranges():
    spec = get_case(7, seed=4)
    noisy = apply_noise(np.full((64, 64, 6), 0.5), spec)
    exact = ((noisy == 0.0) | (noisy == 1.0)).mean(axis=(0, 1))
    assert np.all(exact <= 0.2 + 0.02)
    assert np.ptp(exact) > 0.01  # bands draw different levels


def test_json_round_trip():
    spec = get_case(7, seed=2**63 + 5)
    again = NoiseSpec.from_json(spec.to_json())
    assert again == spec
    assert json.loads(spec.to_json())["seed"] == 2**63 + 5
    with pytest.raises(ValueError, match="unknown"):
        NoiseSpec.from_json('{"sigma": 0.1}')


@pytest.mark.parametrize("bad", [
    dict(gaussian_sigma=-0.1), dict(impulse_fraction=1.5), dict(gaussian_sigma=(0.2, 0.1)),
    dict(deadline_bands=(10, 5)), dict(stripe_bands=(0, 4)), dict(seed=-1), dict(seed=2**64),
])
def test_spec_validation(bad):
    with pytest.raises(ValueError):
        NoiseSpec(**bad)


def test_input_validation(rng):
    with pytest.raises(ValueError, match="unit_scale"):
        apply_noise(rng.uniform(0, 2, (3, 3, 3)), NoiseSpec())
    with pytest.raises(ValueError, match="3-D"):
        apply_noise(np.zeros((3, 3)), NoiseSpec())


def test_unit_scale(rng):
    x = unit_scale(rng.uniform(-5, 7, (4, 4, 4)))
    assert x.min() == 0 and x.max() == 1
    assert not np.any(unit_scale(np.full((2, 2, 2), 3.0)))
