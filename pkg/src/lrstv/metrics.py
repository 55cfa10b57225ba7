"""Image quality indices for hyperspectral cubes: PSNR, SSIM, ERGAS, SAM."""
from dataclasses import asdict, dataclass

import numpy as np
from scipy.ndimage import correlate1d

__all__ = [
    "PSNR_CAP", "psnr", "ssim", "mpsnr", "mssim", "ergas", "sam", "MetricsReport", "report",
]

#: reported value for a perfect reconstruction
PSNR_CAP = 100.0

SSIM_WIN = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _same_shape(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def psnr(ref, test, peak=1.0):
    """Peak signal-to-noise ratio in dB, capped at :data:`PSNR_CAP`."""
    ref, test = _same_shape(ref, test)
    if peak <= 0:
        raise ValueError("peak must be positive")
    mse = np.mean((ref - test) ** 2)
    if mse == 0:
        return PSNR_CAP
    return float(min(10.0 * np.log10(peak**2 / mse), PSNR_CAP))


def _gaussian_window():
    x = np.arange(SSIM_WIN) - SSIM_WIN // 2
    g = np.exp(-(x**2) / (2 * SSIM_SIGMA**2))
    return g / g.sum()


def _filter_valid(img, g):
    out = correlate1d(img, g, axis=0, mode="constant")
    out = correlate1d(out, g, axis=1, mode="constant")
    h = SSIM_WIN // 2
    return out[h:-h, h:-h]


def ssim(ref, test, peak=1.0):
    """Mean structural similarity of two matrices.

    11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03, statistics taken
    only where the window fits inside the image.
    """
    ref, test = _same_shape(ref, test)
    if ref.ndim != 2:
        raise ValueError("ssim expects matrices")
    if min(ref.shape) < SSIM_WIN:
        raise ValueError(f"images must be at least {SSIM_WIN}x{SSIM_WIN}, got {ref.shape}")
    g = _gaussian_window()
    c1 = (SSIM_K1 * peak) ** 2
    c2 = (SSIM_K2 * peak) ** 2
    mu_x = _filter_valid(ref, g)
    mu_y = _filter_valid(test, g)
    sxx = _filter_valid(ref * ref, g) - mu_x**2
    syy = _filter_valid(test * test, g) - mu_y**2
    sxy = _filter_valid(ref * test, g) - mu_x * mu_y
    num = (2 * mu_x * mu_y + c1) * (2 * sxy + c2)
    den = (mu_x**2 + mu_y**2 + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))


def mpsnr(ref, test, peak=1.0):
    """PSNR averaged over bands."""
    ref, test = _same_shape(ref, test)
    return float(np.mean([psnr(ref[:, :, b], test[:, :, b], peak) for b in range(ref.shape[2])]))


def mssim(ref, test, peak=1.0):
    """SSIM averaged over bands."""
    ref, test = _same_shape(ref, test)
    return float(np.mean([ssim(ref[:, :, b], test[:, :, b], peak) for b in range(ref.shape[2])]))


def ergas(ref, test):
    """ERGAS with resolution ratio 1: ``100 * sqrt(mean_b (RMSE_b / mean_b)^2)``."""
    ref, test = _same_shape(ref, test)
    means = ref.mean(axis=(0, 1))
    if np.any(means == 0):
        raise ValueError("ERGAS undefined: reference has a zero-mean band")
    rmse = np.sqrt(np.mean((ref - test) ** 2, axis=(0, 1)))
    return float(100.0 * np.sqrt(np.mean((rmse / means) ** 2)))


def sam(ref, test):
    """Mean spectral angle in radians over pixels with nonzero spectra."""
    ref, test = _same_shape(ref, test)
    r = ref.reshape(-1, ref.shape[-1])
    t = test.reshape(-1, test.shape[-1])
    nr = np.linalg.norm(r, axis=1)
    nt = np.linalg.norm(t, axis=1)
    keep = (nr > 0) & (nt > 0)
    if not np.any(keep):
        raise ValueError("SAM undefined: every spectrum has zero norm")
    cos = np.sum(r[keep] * t[keep], axis=1) / (nr[keep] * nt[keep])
    return float(np.mean(np.arccos(np.clip(cos, -1.0, 1.0))))


@dataclass
class MetricsReport:
    mpsnr: float
    mssim: float
    ergas: float
    sam: float
    per_band_psnr: list
    per_band_ssim: list

    def to_dict(self):
        return asdict(self)

    def csv_rows(self):
        """One ``(band, psnr, ssim)`` row per band."""
        return [
            {"band": b + 1, "psnr": p, "ssim": s}
            for b, (p, s) in enumerate(zip(self.per_band_psnr, self.per_band_ssim))
        ]


def report(ref, test, peak=1.0):
    """Band-averaged PSNR/SSIM plus cube-level ERGAS and SAM."""
    ref, test = _same_shape(ref, test)
    if ref.ndim != 3:
        raise ValueError("report expects cubes")
    bp = [psnr(ref[:, :, b], test[:, :, b], peak) for b in range(ref.shape[2])]
    bs = [ssim(ref[:, :, b], test[:, :, b], peak) for b in range(ref.shape[2])]
    return MetricsReport(
        mpsnr=float(np.mean(bp)),
        mssim=float(np.mean(bs)),
        ergas=ergas(ref, test),
        sam=sam(ref, test),
        per_band_psnr=bp,
        per_band_ssim=bs,
    )
