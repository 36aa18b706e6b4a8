"""Frame and video fidelity metrics: PSNR and SSIM with canonical settings."""

from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .validation import as_cube, as_frame

__all__ = ["MetricReport", "psnr", "ssim", "evaluate", "PSNR_CAP"]

#: PSNR reported for a zero-MSE pair; keeps JSON reports finite.
PSNR_CAP = 99.0

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03


@dataclass(frozen=True)
class MetricReport:
    """Per-frame PSNR/SSIM vectors plus their arithmetic means."""

    per_frame_psnr: tuple
    per_frame_ssim: tuple
    mean_psnr: float
    mean_ssim: float

    def to_dict(self):
        return {
            "psnr_mean": self.mean_psnr,
            "ssim_mean": self.mean_ssim,
            "psnr_frames": list(self.per_frame_psnr),
            "ssim_frames": list(self.per_frame_ssim),
        }


def psnr(ref, test, peak=1.0):
    """Peak signal-to-noise ratio in dB; zero MSE is capped at 99 dB."""
    a = as_frame(ref, "ref")
    b = as_frame(test, "test")
    if a.shape != b.shape:
        raise ValueError(f"frame shapes differ: {a.shape} vs {b.shape}")
    if peak <= 0:
        raise ValueError("peak must be > 0")
    mse = float(np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2))
    if mse == 0.0:
        return PSNR_CAP
    return 10.0 * np.log10(peak * peak / mse)


def _gaussian_window():
    half = _SSIM_WINDOW // 2
    ax = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(ax ** 2) / (2.0 * _SSIM_SIGMA ** 2))
    w = np.outer(g, g)
    return w / w.sum()


def ssim(ref, test, peak=1.0):
    """Mean local structural similarity over the valid window positions.

    Uses the canonical 11x11 Gaussian window (std 1.5) and stability
    constants (0.01*peak)^2 and (0.03*peak)^2; windows never extend past the
    frame border (valid-region averaging, no padding).
    """
    a = as_frame(ref, "ref").astype(np.float64)
    b = as_frame(test, "test").astype(np.float64)
    if a.shape != b.shape:
        raise ValueError(f"frame shapes differ: {a.shape} vs {b.shape}")
    if min(a.shape) < _SSIM_WINDOW:
        raise ValueError(f"frame {a.shape} smaller than the "
                         f"{_SSIM_WINDOW}x{_SSIM_WINDOW} SSIM window")
    w = _gaussian_window()
    mu_a = convolve2d(a, w, mode="valid")
    mu_b = convolve2d(b, w, mode="valid")
    var_a = convolve2d(a * a, w, mode="valid") - mu_a ** 2
    var_b = convolve2d(b * b, w, mode="valid") - mu_b ** 2
    cov = convolve2d(a * b, w, mode="valid") - mu_a * mu_b
    c1 = (_SSIM_K1 * peak) ** 2
    c2 = (_SSIM_K2 * peak) ** 2
    s = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / \
        ((mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2))
    return float(s.mean())


def evaluate(ref, test, peak=1.0):
    """Per-frame PSNR/SSIM between two video cubes, plus their means."""
    a = as_cube(ref, "ref")
    b = as_cube(test, "test")
    if a.shape != b.shape:
        raise ValueError(f"cube shapes differ: {a.shape} vs {b.shape}")
    p = [psnr(a[k], b[k], peak) for k in range(a.shape[0])]
    s = [ssim(a[k], b[k], peak) for k in range(a.shape[0])]
    return MetricReport(per_frame_psnr=tuple(p), per_frame_ssim=tuple(s),
                        mean_psnr=float(np.mean(p)),
                        mean_ssim=float(np.mean(s)))
