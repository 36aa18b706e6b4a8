"""GAP outer loop with exact data projection and staged plug-and-play priors.

Each iteration projects the iterate exactly onto the data-fidelity set
(an element-wise operation thanks to the diagonal Gram structure) and then
denoises it: TV only during the first ``k1`` iterations, TV followed by the
secondary denoiser afterwards.  Running with ``k1 == k_max`` (or no
secondary) is plain GAP-TV.

The loop works in float32, the native precision of the tensor format and
the denoiser wire payload; the element-wise kernels themselves preserve the
dtype of whatever they are given.
"""

import math
from dataclasses import dataclass

import numpy as np

from .denoise import tv_denoise
from .errors import PluginTransportError, SolverAbortedError
from .plugin import PluginClient
from .validation import as_cube, mask_arrays, measurement_array

__all__ = ["SolverOptions", "ReconResult", "sigma_schedule", "gap_x_update",
           "run_gap"]


@dataclass(frozen=True)
class SolverOptions:
    """Iteration budget, staging split, and the noise-level schedule.

    ``sqrt(lambda0)`` is the starting denoiser noise level; it decays by
    ``xi`` per iteration down to ``sigma_floor``.  ``k1`` iterations run the
    TV stage alone before the secondary denoiser joins.  ``tol`` stops the
    loop early when the relative residual change falls below it (0 keeps a
    fixed iteration count).
    """

    k_max: int = 160
    k1: int = 160
    lambda0: float = 0.01
    xi: float = 0.94
    sigma_floor: float = 0.0
    tol: float = 0.0
    record_trace: bool = True

    def __post_init__(self):
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if not 0 <= self.k1 <= self.k_max:
            raise ValueError("k1 must lie in [0, k_max]")
        if not 0 < self.xi <= 1.0:
            raise ValueError("xi must lie in (0, 1]")
        if self.lambda0 < 0 or self.sigma_floor < 0 or self.tol < 0:
            raise ValueError("lambda0, sigma_floor and tol must be >= 0")


@dataclass(frozen=True)
class ReconResult:
    """Solver output: the estimate plus convergence bookkeeping.

    ``denoiser_log[k]`` names the denoisers that ran at iteration k+1;
    ``unlit_mask`` flags pixels never illuminated by any mask (reconstructed
    as 0 and excluded from the data projection).
    """

    video: np.ndarray
    residual_trace: tuple
    iterations_run: int
    denoiser_log: tuple
    unlit_mask: np.ndarray

    @property
    def unlit_pixels(self):
        return int(self.unlit_mask.sum())


def sigma_schedule(opts, k):
    """Denoiser noise level at iteration k >= 1 (geometric decay, floored)."""
    if k < 1:
        raise ValueError("iterations are numbered from 1")
    return max(math.sqrt(opts.lambda0) * opts.xi ** (k - 1), opts.sigma_floor)


def gap_x_update(v, y, masks):
    """Exact projection of ``v`` onto {x : Hx = y} (Gram-weighted).

    Element-wise: ``x_k = v_k + C_k * (y - sum_j C_j v_j) / R`` with
    ``R = sum_j C_j^2``.  Pixels with R = 0 carry no data and keep ``v``.
    Dtype follows the inputs.
    """
    c = mask_arrays(masks)
    vv = as_cube(v, "iterate")
    yy = measurement_array(y)
    if vv.shape != c.shape:
        raise ValueError(f"iterate {vv.shape} does not match masks {c.shape}")
    if yy.shape != c.shape[1:]:
        raise ValueError(f"measurement {yy.shape} does not match masks "
                         f"{c.shape}")
    r = np.einsum("kij,kij->ij", c, c)
    return _x_update(vv, yy, c, r)


def _x_update(v, y, c, r):
    residual = y - np.einsum("kij,kij->ij", c, v)
    corr = np.divide(residual, r, out=np.zeros_like(residual), where=r > 0)
    return v + c * corr


def run_gap(y, masks, chain, opts):
    """Reconstruct a video cube from one coded snapshot.

    Starts from the Gram-normalized back-projection of ``y``, alternates the
    exact data projection with the staged denoiser chain, and clamps the
    final frames to [0, 1].  The recorded residual is ``||y - H v(k)||_2``
    after each iteration's denoising step.

    The TV stage weight follows the noise-level schedule (scaled by
    ``sigma(k) / sigma(1)``), so ``xi = 1`` keeps it constant.  A secondary
    plugin failure aborts the run with the partial trace preserved.
    """
    if chain.stage1 is None:
        raise ValueError("denoiser chain needs at least a TV stage")
    c = mask_arrays(masks).astype(np.float32)
    yy = measurement_array(y).astype(np.float32)
    if yy.shape != c.shape[1:]:
        raise ValueError(f"measurement {yy.shape} does not match masks "
                         f"{c.shape}")
    r = np.einsum("kij,kij->ij", c, c)
    unlit = r == 0

    client = None
    secondary_name = None
    if isinstance(chain.stage2, str):
        secondary_name = "echo"
    elif chain.stage2 is not None:
        client = PluginClient(chain.stage2)
        secondary_name = client.name

    v = c * np.divide(yy, r, out=np.zeros_like(yy), where=~unlit)
    trace = []
    log = []
    sigma1 = sigma_schedule(opts, 1)
    iterations = 0
    try:
        for k in range(1, opts.k_max + 1):
            x = _x_update(v, yy, c, r)
            sigma_k = sigma_schedule(opts, k)
            w_k = chain.stage1.weight * (sigma_k / sigma1 if sigma1 > 0
                                         else 1.0)
            v = tv_denoise(x, w_k, chain.stage1.inner_iters)
            ran = ["tv"]
            if k > opts.k1 and chain.stage2 is not None:
                if chain.stage2 == "echo":
                    pass  # identity secondary
                else:
                    try:
                        v = client.denoise(v, sigma_k)
                    except PluginTransportError as exc:
                        partial = _result(v, trace, iterations, log, unlit)
                        raise SolverAbortedError(
                            f"secondary denoiser failed at iteration {k}: "
                            f"{exc}", partial=partial) from exc
                ran.append(secondary_name)
            log.append(tuple(ran))
            iterations = k
            if opts.record_trace or opts.tol > 0:
                resid = float(np.linalg.norm(
                    yy - np.einsum("kij,kij->ij", c, v)))
                trace.append(resid)
                if (opts.tol > 0 and len(trace) >= 2 and trace[-2] > 0
                        and abs(trace[-2] - trace[-1]) < opts.tol * trace[-2]):
                    break
    finally:
        if client is not None:
            client.close()
    if not opts.record_trace:
        trace = []
    return _result(v, trace, iterations, log, unlit)


def _result(v, trace, iterations, log, unlit):
    out = np.clip(v, 0.0, 1.0)
    out[:, unlit] = 0.0
    return ReconResult(video=out, residual_trace=tuple(trace),
                       iterations_run=iterations, denoiser_log=tuple(log),
                       unlit_mask=unlit.copy())
