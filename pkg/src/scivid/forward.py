"""Snapshot sensing operator, measurement synthesis and mask calibration.

The sensing operator collapses a ``(B, nx, ny)`` video cube into one coded
2-D snapshot by mask-weighting each frame and summing.  Because each frame's
sub-matrix is diagonal, the Gram operator is diagonal too, so the forward,
adjoint and Gram kernels are all element-wise and never materialize a
matrix.  A dense-matrix construction is provided purely as a test oracle.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CalibrationDegenerateError, OperatorTooLargeError
from .optics import MaskStack
from .validation import as_cube, as_frame, mask_arrays, measurement_array

__all__ = ["VideoCube", "Measurement", "NoiseModel", "CalibrationSet",
           "forward_op", "adjoint_op", "hht_diag", "dense_operator",
           "encode", "calibrate", "preprocess_measurement",
           "DENSE_OPERATOR_MAX_PIXELS"]

#: Hard guard on n = nx*ny for the dense oracle; a full-sensor dense matrix
#: would be ~1e7 x 1e8 and must never be constructed.
DENSE_OPERATOR_MAX_PIXELS = 4096


@dataclass(frozen=True)
class VideoCube:
    """A ``(B, nx, ny)`` video signal with values in [0, 1]."""

    data: np.ndarray
    frame_rate_label: str = ""

    def __post_init__(self):
        arr = as_cube(self.data, "video cube")
        object.__setattr__(self, "data", arr)
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("video cube values must lie in [0, 1]")

    @property
    def n_frames(self):
        return self.data.shape[0]

    @property
    def frame_shape(self):
        return self.data.shape[1:]


@dataclass(frozen=True)
class Measurement:
    """Single coded snapshot plus noise metadata."""

    data: np.ndarray
    noise_sigma: float = 0.0
    background_subtracted: bool = False

    def __post_init__(self):
        arr = as_frame(self.data, "measurement")
        object.__setattr__(self, "data", arr)
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass(frozen=True)
class NoiseModel:
    """Additive Gaussian sensor noise, sigma given on the 0-255 count scale.

    The toolkit works in [0, 1], so sigma is divided by 255 before sampling.
    """

    kind: str = "gaussian"
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")


@dataclass(frozen=True)
class CalibrationSet:
    """Captured raw mask images plus illumination/background references."""

    raw_masks: np.ndarray
    illumination: np.ndarray
    background: np.ndarray
    epsilon: float = 1e-3

    def __post_init__(self):
        raw = np.asarray(self.raw_masks, dtype=float)
        illum = np.asarray(self.illumination, dtype=float)
        bg = np.asarray(self.background, dtype=float)
        object.__setattr__(self, "raw_masks", raw)
        object.__setattr__(self, "illumination", illum)
        object.__setattr__(self, "background", bg)
        if raw.ndim != 3:
            raise ValueError("raw_masks must be (B, nx, ny)")
        if illum.shape != raw.shape[1:] or bg.shape != raw.shape[1:]:
            raise ValueError("illumination/background dims must match masks")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")


def _collapse(video, masks):
    return np.einsum("kij,kij->ij", masks, video)


def forward_op(video, masks):
    """Collapse a video cube into its coded snapshot: sum_k C_k * X_k."""
    x = as_cube(video)
    c = mask_arrays(masks)
    if x.shape != c.shape:
        raise ValueError(f"video {x.shape} does not match masks {c.shape}")
    return Measurement(data=_collapse(x, c), noise_sigma=0.0)


def adjoint_op(y, masks):
    """Back-project a snapshot through the masks: frame k gets C_k * Y.

    Returns the raw ``(B, nx, ny)`` array; its values are not confined to
    [0, 1] (the adjoint is not a reconstruction).
    """
    c = mask_arrays(masks)
    ydat = measurement_array(y)
    if ydat.shape != c.shape[1:]:
        raise ValueError(f"measurement {ydat.shape} does not match "
                         f"masks {c.shape}")
    return c * ydat[None, :, :]


def hht_diag(masks):
    """Per-pixel diagonal of the Gram operator: R = sum_k C_k^2.

    The Gram matrix of the sensing operator is exactly ``diag(vec(R))``, so
    its inverse in the data-fidelity update is an element-wise division.
    """
    c = mask_arrays(masks)
    return np.einsum("kij,kij->ij", c, c)


def dense_operator(masks):
    """Materialize the sensing matrix ``[D_1, ..., D_B]`` (test oracle only).

    Each block ``D_k = diag(vec(C_k))`` is n x n with n = nx*ny; refuses to
    build anything with n above the module guard.
    """
    c = mask_arrays(masks)
    b, nx, ny = c.shape
    n = nx * ny
    if n > DENSE_OPERATOR_MAX_PIXELS:
        raise OperatorTooLargeError(
            f"dense operator guard: n={n} exceeds {DENSE_OPERATOR_MAX_PIXELS}")
    h = np.zeros((n, n * b), dtype=np.float64)
    idx = np.arange(n)
    for k in range(b):
        h[idx, k * n + idx] = c[k].ravel()
    return h


def encode(video, masks, noise=None):
    """Simulate a capture: forward-collapse the cube, then add sensor noise.

    Noise is i.i.d. Gaussian with std ``noise.sigma / 255`` (sigma stated in
    0-255 counts), deterministic per ``noise.seed``.
    """
    clean = forward_op(video, masks).data
    if noise is None or noise.kind == "none" or noise.sigma == 0.0:
        sigma = 0.0 if noise is None else float(noise.sigma)
        return Measurement(data=clean, noise_sigma=sigma)
    rng = np.random.default_rng(noise.seed)
    g = rng.normal(0.0, noise.sigma / 255.0, size=clean.shape)
    return Measurement(data=clean + g, noise_sigma=float(noise.sigma))


def calibrate(calset, max_guarded_fraction=0.01):
    """Normalize captured masks by illumination and background references.

    Computes ``(raw_k - Bg) / (I - Bg)`` element-wise, clamped to [0, 1].
    Pixels where the denominator falls below ``epsilon`` are zero-filled and
    counted; if more than ``max_guarded_fraction`` of the frame is guarded
    the calibration is rejected as degenerate.
    """
    denom = calset.illumination - calset.background
    guarded = denom < calset.epsilon
    n_guarded = int(guarded.sum())
    frac = n_guarded / guarded.size
    if frac > max_guarded_fraction:
        raise CalibrationDegenerateError(
            f"{n_guarded} pixels ({frac:.2%}) below the division guard "
            f"epsilon={calset.epsilon}")
    safe = np.where(guarded, 1.0, denom)
    corrected = (calset.raw_masks - calset.background[None]) / safe[None]
    corrected = np.clip(corrected, 0.0, 1.0)
    corrected[:, guarded] = 0.0
    tau = corrected.max(axis=(1, 2))
    return MaskStack(masks=corrected, throughput=tau,
                     provenance="calibration",
                     meta={"guarded_pixels": n_guarded,
                           "guarded_fraction": frac})


def preprocess_measurement(y_raw, background):
    """Subtract the background pattern from a raw snapshot, clamped at 0."""
    raw = measurement_array(y_raw, "raw measurement")
    bg = as_frame(background, "background")
    if raw.shape != bg.shape:
        raise ValueError(f"measurement {raw.shape} does not match "
                         f"background {bg.shape}")
    sigma = float(getattr(y_raw, "noise_sigma", 0.0))
    return Measurement(data=np.maximum(raw - bg, 0.0), noise_sigma=sigma,
                       background_subtracted=True)
