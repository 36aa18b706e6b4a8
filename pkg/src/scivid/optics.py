"""Aperture multiplexing patterns and shifted-window encoding masks.

A static oversized binary master mask is viewed through a grid of
sub-apertures.  Opening sub-aperture ``i`` projects the master shifted by an
integer pixel offset; opening several at once yields their normalized sum.
Per-frame open/close patterns therefore turn one static mask into a stack of
distinct high-resolution encoding masks without any moving part.
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ShiftOutOfBoundsError

__all__ = ["MasterMask", "OpticsGeometry", "AperturePattern", "MaskStack",
           "make_master_mask", "geometric_shift", "shift_window",
           "gen_pattern", "compose_mask", "gen_mask_stack", "SCHEMES"]

#: Supported multiplexing pattern schemes.
#: ``single-shift`` is the non-multiplexed baseline: one sub-aperture per
#: frame, cycling through the grid so every frame gets a distinct shift.
SCHEMES = ("random-squares", "rotating-circle", "single-center", "single-shift")


@dataclass(frozen=True)
class MasterMask:
    """Static random mask oversized by ``margin`` pixels on every side.

    ``data`` has shape ``(nx + 2*margin, ny + 2*margin)``; shifted views are
    extracted as windows, so no boundary padding is ever needed.
    """

    data: np.ndarray
    margin: int
    binary: bool = True

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise ValueError("master mask data must be 2-D")
        if self.margin < 0:
            raise ValueError("margin must be >= 0")
        if arr.shape[0] <= 2 * self.margin or arr.shape[1] <= 2 * self.margin:
            raise ValueError("master mask smaller than twice its margin")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("master mask values must lie in [0, 1]")
        if self.binary and not np.all((arr == 0.0) | (arr == 1.0)):
            raise ValueError("binary master mask contains non-{0,1} values")

    @property
    def nx(self):
        return self.data.shape[0] - 2 * self.margin

    @property
    def ny(self):
        return self.data.shape[1] - 2 * self.margin


@dataclass(frozen=True)
class OpticsGeometry:
    """Sub-aperture layout and the aperture-offset-to-pixel-shift gain.

    ``sub_centers`` holds normalized aperture coordinates in [-1, 1]^2; the
    pixel shift of sub-aperture ``i`` is ``round(shift_gain * sub_centers[i])``.
    The sub-aperture closest to the origin must round to shift (0, 0): it
    defines the center view every other view is a translation of.
    """

    sub_centers: np.ndarray
    shift_gain: float
    grid: tuple = (1, 1)

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.sub_centers, dtype=float))
        object.__setattr__(self, "sub_centers", centers)
        rows, cols = self.grid
        if centers.ndim != 2 or centers.shape[1] != 2:
            raise ValueError("sub_centers must be an (N, 2) array")
        if rows * cols != centers.shape[0]:
            raise ValueError(f"grid {rows}x{cols} does not match "
                             f"{centers.shape[0]} sub-apertures")
        if np.abs(centers).max() > 1.0:
            raise ValueError("sub_centers must lie in [-1, 1]^2")
        if self.shift_gain < 0:
            raise ValueError("shift_gain must be >= 0")
        c = self.central_index
        if geometric_shift(c, self) != (0, 0):
            raise ValueError("central sub-aperture does not map to shift (0, 0)")

    @property
    def n_sub(self):
        return self.sub_centers.shape[0]

    @property
    def central_index(self):
        """Index of the sub-aperture closest to the aperture center."""
        return int(np.argmin(np.hypot(self.sub_centers[:, 0],
                                      self.sub_centers[:, 1])))

    @property
    def max_shift(self):
        """Largest |shift| component the layout can produce, in pixels."""
        shifts = [geometric_shift(i, self) for i in range(self.n_sub)]
        return max(max(abs(dx), abs(dy)) for dx, dy in shifts)

    def fingerprint(self):
        h = hashlib.sha1()
        h.update(np.ascontiguousarray(self.sub_centers).tobytes())
        h.update(np.float64(self.shift_gain).tobytes())
        return h.hexdigest()[:8]

    @classmethod
    def grid_layout(cls, rows=3, cols=4, shift_gain=8.0):
        """Regular rows x cols layout with one sub-aperture exactly at center.

        Axis offsets are ``(index - count//2) / (count//2)`` so that even
        counts still place a cell at the origin (the center view).
        """
        def axis(count):
            if count == 1:
                return np.zeros(1)
            idx = np.arange(count) - count // 2
            return idx / (count // 2)

        rr, cc = np.meshgrid(axis(rows), axis(cols), indexing="ij")
        centers = np.column_stack([rr.ravel(), cc.ravel()])
        return cls(sub_centers=centers, shift_gain=shift_gain,
                   grid=(rows, cols))

    @classmethod
    def ring_layout(cls, n=12, shift_gain=8.0, radius=1.0):
        """``n`` sub-apertures on a circle plus one at the center.

        Useful for rotation-symmetric pattern studies; grid is (1, n+1).
        """
        angles = 2.0 * np.pi * np.arange(n) / n
        ring = radius * np.column_stack([np.cos(angles), np.sin(angles)])
        centers = np.vstack([[0.0, 0.0], ring])
        return cls(sub_centers=centers, shift_gain=shift_gain, grid=(1, n + 1))


@dataclass(frozen=True)
class AperturePattern:
    """Open/close indicator vector over the sub-apertures for one frame."""

    indicators: np.ndarray
    scheme_tag: str
    frame_index: int

    def __post_init__(self):
        ind = np.asarray(self.indicators)
        object.__setattr__(self, "indicators", ind.astype(np.uint8))
        if not np.all((ind == 0) | (ind == 1)):
            raise ValueError("indicators must be 0/1")
        if int(ind.sum()) < 1:
            raise ValueError("at least one sub-aperture must be open")

    @property
    def open_count(self):
        return int(self.indicators.sum())


@dataclass(frozen=True)
class MaskStack:
    """B encoding masks on the sensor grid, with per-frame light throughput.

    ``masks`` has shape ``(B, nx, ny)``; ``throughput[k]`` is the open
    sub-aperture fraction of frame k, an upper bound on ``masks[k]``.
    """

    masks: np.ndarray
    throughput: np.ndarray
    provenance: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.masks, dtype=float)
        tau = np.atleast_1d(np.asarray(self.throughput, dtype=float))
        object.__setattr__(self, "masks", arr)
        object.__setattr__(self, "throughput", tau)
        if arr.ndim != 3:
            raise ValueError("masks must be (B, nx, ny)")
        if tau.shape != (arr.shape[0],):
            raise ValueError("throughput must have one entry per frame")
        if arr.min() < -1e-12 or arr.max() > 1.0 + 1e-12:
            raise ValueError("mask values must lie in [0, 1]")

    @property
    def n_frames(self):
        return self.masks.shape[0]

    @property
    def frame_shape(self):
        return self.masks.shape[1:]

    @classmethod
    def from_arrays(cls, masks, provenance="direct"):
        """Wrap raw mask arrays; throughput falls back to the per-frame max."""
        arr = np.asarray(masks, dtype=float)
        tau = arr.max(axis=(1, 2))
        return cls(masks=arr, throughput=tau, provenance=provenance)


def make_master_mask(nx, ny, margin, density=0.5, seed=0):
    """Draw an i.i.d. Bernoulli(density) binary master mask with a margin.

    Deterministic per seed.  ``density`` may be 0 or 1, giving all-zeros or
    all-ones masks (useful as degenerate test cases).
    """
    if nx <= 0 or ny <= 0 or margin < 0:
        raise ValueError("mask dimensions must be positive")
    if not 0.0 <= density <= 1.0:
        raise ValueError("density must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    shape = (nx + 2 * margin, ny + 2 * margin)
    data = (rng.random(shape) < density).astype(np.float64)
    return MasterMask(data=data, margin=int(margin), binary=True)


def geometric_shift(i, geometry):
    """Pixel shift of sub-aperture ``i``: round(shift_gain * offset)."""
    if not 0 <= i < geometry.n_sub:
        raise ValueError(f"sub-aperture index {i} out of range "
                         f"[0, {geometry.n_sub})")
    off = geometry.sub_centers[i]
    dx = int(np.rint(geometry.shift_gain * off[0]))
    dy = int(np.rint(geometry.shift_gain * off[1]))
    return dx, dy


def shift_window(master, dx, dy):
    """Extract the sensor-sized window of the master at shift (dx, dy).

    The window starts at ``(margin + dx, margin + dy)``; shifts beyond the
    margin raise instead of padding or wrapping.
    """
    m = master.margin
    if abs(dx) > m or abs(dy) > m:
        raise ShiftOutOfBoundsError(
            f"shift ({dx}, {dy}) exceeds master margin {m}")
    nx, ny = master.nx, master.ny
    return master.data[m + dx:m + dx + nx, m + dy:m + dy + ny].copy()


def _rotating_circle_indicators(k, n_frames, geometry, disc_radius,
                                orbit_radius, phase=0.0):
    """Open the sub-apertures inside a disc orbiting the aperture center.

    The disc center sits at ``orbit_radius`` from the origin and advances by
    ``360 / n_frames`` degrees per frame.  If the disc catches no sub-aperture
    the single nearest one is opened so the pattern is never dark.
    """
    angle = phase + 2.0 * np.pi * k / n_frames
    center = orbit_radius * np.array([np.cos(angle), np.sin(angle)])
    d = np.hypot(geometry.sub_centers[:, 0] - center[0],
                 geometry.sub_centers[:, 1] - center[1])
    ind = (d <= disc_radius).astype(np.uint8)
    if ind.sum() == 0:
        ind[int(np.argmin(d))] = 1
    return ind


def gen_pattern(scheme, k, n_frames, geometry, seed=0, *,
                disc_radius=0.65, orbit_radius=0.8, phase=0.0):
    """Generate the open/close pattern of frame ``k`` for a scheme.

    random-squares opens exactly ``N // 2`` pseudo-random sub-apertures per
    frame; rotating-circle opens the ones inside a rotating disc;
    single-center opens only the central view; single-shift opens one
    sub-aperture per frame, cycling through the layout starting at the
    center.  Deterministic per (scheme, k, n_frames, seed).
    """
    if not 0 <= k < n_frames:
        raise ValueError(f"frame index {k} out of range [0, {n_frames})")
    n = geometry.n_sub
    if scheme == "random-squares":
        rng = np.random.default_rng([seed, k])
        ind = np.zeros(n, dtype=np.uint8)
        ind[rng.choice(n, n // 2, replace=False)] = 1
    elif scheme == "rotating-circle":
        ind = _rotating_circle_indicators(k, n_frames, geometry,
                                          disc_radius, orbit_radius, phase)
    elif scheme == "single-center":
        ind = np.zeros(n, dtype=np.uint8)
        ind[geometry.central_index] = 1
    elif scheme == "single-shift":
        ind = np.zeros(n, dtype=np.uint8)
        ind[(geometry.central_index + k) % n] = 1
    else:
        raise ValueError(f"unknown pattern scheme {scheme!r}; "
                         f"expected one of {SCHEMES}")
    return AperturePattern(indicators=ind, scheme_tag=scheme, frame_index=k)


def compose_mask(master, pattern, geometry):
    """Sum the shifted master windows of the open sub-apertures, over N.

    Normalizing by the total sub-aperture count (not the open count) makes
    the mask amplitude proportional to the open-aperture fraction, so light
    throughput carries into the measurement scale.
    """
    n = geometry.n_sub
    if pattern.indicators.shape != (n,):
        raise ValueError("pattern length does not match geometry")
    out = np.zeros((master.nx, master.ny), dtype=np.float64)
    for i in np.flatnonzero(pattern.indicators):
        dx, dy = geometric_shift(int(i), geometry)
        out += shift_window(master, dx, dy)
    out /= n
    return out


def gen_mask_stack(master, scheme, n_frames, geometry, seed=0, **scheme_opts):
    """Compose the per-frame encoding masks for a whole capture.

    Returns a MaskStack whose ``throughput[k]`` is the open fraction of
    frame k and whose provenance records scheme, seed and geometry.
    """
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    masks = np.empty((n_frames, master.nx, master.ny), dtype=np.float64)
    tau = np.empty(n_frames, dtype=np.float64)
    for k in range(n_frames):
        pat = gen_pattern(scheme, k, n_frames, geometry, seed, **scheme_opts)
        masks[k] = compose_mask(master, pat, geometry)
        tau[k] = pat.open_count / geometry.n_sub
    prov = f"{scheme}/seed={seed}/geom={geometry.fingerprint()}"
    return MaskStack(masks=masks, throughput=tau, provenance=prov)
