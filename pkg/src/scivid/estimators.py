"""Scikit-learn style wrappers around the encoder and the GAP solver.

``SnapshotEncoder`` is a transformer from video cubes to coded snapshots;
``GapReconstructor`` fits to a mask stack and predicts cubes from
snapshots.  Both follow the get_params/set_params contract so they compose
with pipelines, cloning and grid search.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .denoise import DenoiserChain, TvStage
from .forward import NoiseModel, encode
from .optics import OpticsGeometry, gen_mask_stack, make_master_mask
from .solver import SolverOptions, run_gap
from .validation import as_cube, mask_arrays, measurement_array

__all__ = ["SnapshotEncoder", "GapReconstructor"]


class SnapshotEncoder(BaseEstimator, TransformerMixin):
    """Encode ``(B, nx, ny)`` video cubes into single coded snapshots.

    ``fit`` sizes the master mask and the per-frame encoding masks to the
    input cube; ``transform`` collapses a cube (optionally adding sensor
    noise).  The fitted masks are exposed as ``mask_stack_`` for feeding a
    reconstructor.

    Parameters
    ----------
    scheme : str
        Aperture multiplexing scheme (see ``scivid.optics.SCHEMES``).
    grid : tuple of int
        Sub-aperture layout (rows, cols).
    shift_gain : float
        Pixels of mask shift per unit aperture offset.
    density : float
        Master mask Bernoulli density.
    margin : int or None
        Master mask margin; None derives it from ``shift_gain``.
    noise_sigma : float
        Gaussian noise std on the 0-255 count scale (0 = clean).
    seed : int
        Seed for the master mask, patterns and noise.
    """

    def __init__(self, scheme="random-squares", grid=(3, 4), shift_gain=8.0,
                 density=0.5, margin=None, noise_sigma=0.0, seed=0,
                 disc_radius=0.65, orbit_radius=0.8):
        self.scheme = scheme
        self.grid = grid
        self.shift_gain = shift_gain
        self.density = density
        self.margin = margin
        self.noise_sigma = noise_sigma
        self.seed = seed
        self.disc_radius = disc_radius
        self.orbit_radius = orbit_radius

    def fit(self, X, y=None):
        cube = as_cube(X, "video")
        b, nx, ny = cube.shape
        margin = (int(np.ceil(self.shift_gain)) if self.margin is None
                  else self.margin)
        geometry = OpticsGeometry.grid_layout(self.grid[0], self.grid[1],
                                              self.shift_gain)
        master = make_master_mask(nx, ny, margin, self.density, self.seed)
        self.geometry_ = geometry
        self.master_mask_ = master
        self.mask_stack_ = gen_mask_stack(master, self.scheme, b, geometry,
                                          self.seed,
                                          disc_radius=self.disc_radius,
                                          orbit_radius=self.orbit_radius)
        return self

    def transform(self, X):
        if not hasattr(self, "mask_stack_"):
            raise RuntimeError("SnapshotEncoder is not fitted yet")
        cube = as_cube(X, "video")
        if cube.shape != self.mask_stack_.masks.shape:
            raise ValueError(f"cube {cube.shape} does not match fitted "
                             f"masks {self.mask_stack_.masks.shape}")
        noise = NoiseModel(kind="gaussian" if self.noise_sigma > 0 else
                           "none", sigma=self.noise_sigma, seed=self.seed)
        return encode(cube, self.mask_stack_, noise).data


class GapReconstructor(BaseEstimator):
    """Recover video cubes from coded snapshots with GAP plug-and-play.

    ``fit`` takes the mask stack used for encoding; ``predict`` inverts one
    snapshot.  With ``k1 == k_max`` (the default when ``k1`` is None) this
    is plain GAP-TV.

    Parameters mirror ``SolverOptions`` and the TV stage; ``secondary`` is
    None, "echo", or a ``PluginEndpoint`` for the staged denoiser.
    """

    def __init__(self, k_max=160, k1=None, lambda0=0.01, xi=0.94,
                 sigma_floor=0.0, tol=0.0, tv_weight=0.1, tv_inner_iters=5,
                 secondary=None):
        self.k_max = k_max
        self.k1 = k1
        self.lambda0 = lambda0
        self.xi = xi
        self.sigma_floor = sigma_floor
        self.tol = tol
        self.tv_weight = tv_weight
        self.tv_inner_iters = tv_inner_iters
        self.secondary = secondary

    def fit(self, X, y=None):
        """Bind the reconstructor to a mask stack (MaskStack or array)."""
        self.masks_ = mask_arrays(X, "masks")
        return self

    def predict(self, Y):
        if not hasattr(self, "masks_"):
            raise RuntimeError("GapReconstructor is not fitted yet")
        yy = measurement_array(Y)
        opts = SolverOptions(
            k_max=self.k_max,
            k1=self.k_max if self.k1 is None else self.k1,
            lambda0=self.lambda0, xi=self.xi,
            sigma_floor=self.sigma_floor, tol=self.tol)
        chain = DenoiserChain(stage1=TvStage(weight=self.tv_weight,
                                             inner_iters=self.tv_inner_iters),
                              stage2=self.secondary)
        self.result_ = run_gap(yy, self.masks_, chain, opts)
        return self.result_.video

    def score(self, Y, X_true):
        """Mean reconstruction PSNR (dB) of predict(Y) against the truth."""
        from .metrics import evaluate
        return evaluate(as_cube(X_true, "truth"), self.predict(Y)).mean_psnr
