"""Built-in total-variation video denoiser and the staged denoiser chain.

TV is applied per frame in 2-D (spatial only) via a fixed number of dual
projection passes; temporal coupling is left to the secondary (video)
denoiser stage.  The chain runs TV first, then optionally a secondary
denoiser: ``None`` (single-stage), the string ``"echo"`` (pure in-process
identity), or a :class:`~scivid.plugin.PluginEndpoint`.
"""

from dataclasses import dataclass, field

import numpy as np

from .plugin import PluginClient, PluginEndpoint
from .validation import as_cube

__all__ = ["TvStage", "DenoiserChain", "tv_denoise", "chain_denoise",
           "tv_norm"]


@dataclass(frozen=True)
class TvStage:
    """Parameters of the TV stage: proximal weight and dual passes."""

    weight: float = 0.1
    inner_iters: int = 5

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("TV weight must be >= 0")
        if self.inner_iters < 1:
            raise ValueError("inner_iters must be >= 1")


@dataclass(frozen=True)
class DenoiserChain:
    """Fixed TV-then-secondary denoising plan."""

    stage1: TvStage = field(default_factory=TvStage)
    stage2: object = None   # None | "echo" | PluginEndpoint

    def __post_init__(self):
        s2 = self.stage2
        if s2 is not None and s2 != "echo" and not isinstance(s2,
                                                              PluginEndpoint):
            raise ValueError("stage2 must be None, 'echo', or a "
                             "PluginEndpoint")

    @property
    def has_secondary(self):
        return self.stage2 is not None


def _grad(u):
    """Forward-difference gradient with Neumann boundary (last row/col 0)."""
    g = np.zeros((2,) + u.shape, dtype=u.dtype)
    g[0, :-1, :] = u[1:, :] - u[:-1, :]
    g[1, :, :-1] = u[:, 1:] - u[:, :-1]
    return g


def _div(p):
    """Discrete divergence, the negative adjoint of :func:`_grad`."""
    out = np.zeros(p.shape[1:], dtype=p.dtype)
    out[:-1, :] += p[0, :-1, :]
    out[1:, :] -= p[0, :-1, :]
    out[:, :-1] += p[1, :, :-1]
    out[:, 1:] -= p[1, :, :-1]
    return out


def _tv_frame(frame, weight, inner_iters):
    """Isotropic TV proximal step by dual projection with fixed passes."""
    tau = 0.25
    f = frame
    p = np.zeros((2,) + f.shape, dtype=f.dtype)
    for _ in range(inner_iters):
        g = _grad(_div(p) - f / weight)
        denom = 1.0 + tau * np.sqrt(g[0] ** 2 + g[1] ** 2)
        p = (p + tau * g) / denom
    return f - weight * _div(p)


def tv_norm(frame):
    """Isotropic total-variation functional of a 2-D frame."""
    g = _grad(np.asarray(frame, dtype=np.float64))
    return float(np.sqrt(g[0] ** 2 + g[1] ** 2).sum())


def tv_denoise(video, weight, inner_iters=5):
    """Per-frame 2-D isotropic TV proximal step.

    ``weight`` is the proximal regularization strength; weight 0 returns the
    input unchanged.  Accepts a ``(B, nx, ny)`` cube or a single 2-D frame;
    dtype is preserved.
    """
    if weight < 0:
        raise ValueError("TV weight must be >= 0")
    if inner_iters < 1:
        raise ValueError("inner_iters must be >= 1")
    arr = np.asarray(getattr(video, "data", video))
    single = arr.ndim == 2
    cube = arr[None] if single else as_cube(arr)
    if weight == 0:
        out = cube.copy()
    else:
        out = np.empty_like(cube)
        for k in range(cube.shape[0]):
            out[k] = _tv_frame(cube[k], weight, inner_iters)
    return out[0] if single else out


def chain_denoise(video, chain, sigma, stage="full", client=None):
    """Apply the chain to a cube: TV, then (stage="full") the secondary.

    ``sigma`` is the noise level handed to the secondary denoiser, in [0, 1]
    units; the TV stage does not consume it.  A live :class:`PluginClient`
    may be passed to reuse a session; otherwise one is opened per call.
    """
    if stage not in ("tv-only", "full"):
        raise ValueError(f"unknown stage {stage!r}")
    out = tv_denoise(video, chain.stage1.weight, chain.stage1.inner_iters)
    if stage == "tv-only" or chain.stage2 is None:
        return out
    if chain.stage2 == "echo":
        return out
    if client is not None:
        return client.denoise(out, sigma)
    with PluginClient(chain.stage2) as c:
        return c.denoise(out, sigma)
