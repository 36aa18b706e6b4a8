"""Built-in synthetic test scenes and dataset ingestion.

The generators are self-contained ground truths for benchmarks; real
footage is ingested from a 3-D tensor file or a directory of numbered
grayscale/color frames (users pre-extract frames; no codec I/O here).
"""

import os

import numpy as np

from . import vsct

__all__ = ["moving_square", "drifting_sinusoid", "rotating_bars",
           "BUILTIN_SCENES", "load_scene"]

_LUMA = (0.299, 0.587, 0.114)


def moving_square(size, n_frames, side=None):
    """Bright square on black, translating one pixel per frame diagonally.

    Frame k holds the square at offset (k, k) from its start corner; the
    trajectory is clipped to stay inside the frame.
    """
    side = max(size // 8, 2) if side is None else side
    start = max(size // 8, 1)
    cube = np.zeros((n_frames, size, size), dtype=np.float64)
    for k in range(n_frames):
        off = min(start + k, size - side)
        cube[k, off:off + side, off:off + side] = 1.0
    return cube


def drifting_sinusoid(size, n_frames, cycles=4.0, drift=2.0):
    """Diagonal sinusoidal grating drifting ``drift`` pixels per frame."""
    ax = np.arange(size, dtype=np.float64)
    xx, yy = np.meshgrid(ax, ax, indexing="ij")
    cube = np.empty((n_frames, size, size), dtype=np.float64)
    for k in range(n_frames):
        phase = 2.0 * np.pi * cycles * (xx + yy + drift * k) / size
        cube[k] = 0.5 + 0.5 * np.sin(phase)
    return cube


def rotating_bars(size, n_frames, n_bars=4, step_deg=6.0):
    """Binary bar pattern rotating ``step_deg`` degrees per frame."""
    ax = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    xx, yy = np.meshgrid(ax, ax, indexing="ij")
    cube = np.empty((n_frames, size, size), dtype=np.float64)
    for k in range(n_frames):
        theta = np.deg2rad(step_deg) * k
        u = xx * np.cos(theta) + yy * np.sin(theta)
        cube[k] = (np.sin(2.0 * np.pi * n_bars * u / size) > 0).astype(
            np.float64)
    return cube


BUILTIN_SCENES = {
    "moving-square": moving_square,
    "drifting-sinusoid": drifting_sinusoid,
    "rotating-bars": rotating_bars,
}


def _center_crop(frame, size):
    r0 = (frame.shape[0] - size) // 2
    c0 = (frame.shape[1] - size) // 2
    return frame[r0:r0 + size, c0:c0 + size]


def _load_image_frame(path):
    from PIL import Image
    with Image.open(path) as img:
        arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 3:
        arr = (_LUMA[0] * arr[..., 0] + _LUMA[1] * arr[..., 1]
               + _LUMA[2] * arr[..., 2])
    return arr / 255.0


def load_scene(source, scale, n_frames):
    """Load a ground-truth cube: builtin generator, tensor file, or frames.

    The result is center-cropped to ``scale`` x ``scale``, grayscale, in
    [0, 1], with exactly ``n_frames`` frames.
    """
    if scale < 1 or n_frames < 1:
        raise ValueError("scale and n_frames must be >= 1")
    if source in BUILTIN_SCENES:
        return BUILTIN_SCENES[source](scale, n_frames)
    if os.path.isdir(source):
        exts = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")
        names = sorted(f for f in os.listdir(source)
                       if f.lower().endswith(exts))
        if len(names) < n_frames:
            raise ValueError(f"{source} holds {len(names)} frames, "
                             f"need {n_frames}")
        frames = [_load_image_frame(os.path.join(source, f))
                  for f in names[:n_frames]]
        cube = np.stack(frames)
    elif os.path.isfile(source):
        cube = vsct.load_tensor(source).astype(np.float64)
        if cube.ndim != 3:
            raise ValueError(f"{source} is not a 3-D tensor")
        if cube.shape[0] < n_frames:
            raise ValueError(f"{source} holds {cube.shape[0]} frames, "
                             f"need {n_frames}")
        cube = cube[:n_frames]
    else:
        raise ValueError(f"unknown scene {source!r}: not a builtin "
                         f"({', '.join(sorted(BUILTIN_SCENES))}), file, "
                         f"or directory")
    if cube.shape[1] < scale or cube.shape[2] < scale:
        raise ValueError(f"scene frames {cube.shape[1:]} smaller than "
                         f"requested scale {scale}")
    if cube.shape[1:] != (scale, scale):
        cube = np.stack([_center_crop(f, scale) for f in cube])
    return np.clip(cube, 0.0, 1.0)
