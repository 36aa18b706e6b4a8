"""Input validation helpers used across the estimator and functional APIs."""

import numpy as np

__all__ = ["as_cube", "as_frame", "mask_arrays", "measurement_array",
           "check_same_shape"]


def as_cube(x, name="video"):
    """Coerce a video cube (or an object with a ``.data`` cube) to an ndarray.

    The canonical in-memory layout is frame-major ``(B, nx, ny)``, matching
    the on-disk tensor format and the denoiser wire payload.
    """
    arr = np.asarray(getattr(x, "data", x))
    if arr.ndim != 3:
        raise ValueError(f"{name} must be a 3-D (frames, rows, cols) array, "
                         f"got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1 or arr.shape[2] < 1:
        raise ValueError(f"{name} has an empty dimension: {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_frame(x, name="frame"):
    """Coerce a single 2-D image (or ``.data``-carrying object) to an ndarray."""
    arr = np.asarray(getattr(x, "data", x))
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def mask_arrays(masks, name="masks"):
    """Extract the ``(B, nx, ny)`` mask array from a MaskStack or ndarray."""
    arr = np.asarray(getattr(masks, "masks", masks))
    if arr.ndim != 3:
        raise ValueError(f"{name} must be 3-D (frames, rows, cols), "
                         f"got ndim={arr.ndim}")
    return arr


def measurement_array(y, name="measurement"):
    """Extract the 2-D snapshot array from a Measurement or ndarray."""
    return as_frame(getattr(y, "data", y), name)


def check_same_shape(a, b, what="arrays"):
    if a.shape != b.shape:
        raise ValueError(f"{what} shapes differ: {a.shape} vs {b.shape}")
