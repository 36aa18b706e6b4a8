"""Compact temporal-window video denoiser.

FastDVDNet-style operation: each output frame is predicted from a sliding
window of neighboring frames (clamp-repeated at the sequence edges) plus a
constant noise-level map, with residual learning.  The network is small
enough for CPU inference inside an iterative solver loop.
"""

import numpy as np
import torch
import torch.nn as nn

WINDOW = 5
WIDTH = 48
DEPTH = 6


class WindowDenoiser(nn.Module):
    """Denoise the center frame of a frame window at a given noise level."""

    def __init__(self, window=WINDOW, width=WIDTH, depth=DEPTH):
        super().__init__()
        self.window = window
        layers = [nn.Conv2d(window + 1, width, 3, padding=1),
                  nn.ReLU(inplace=True)]
        for _ in range(depth - 2):
            layers += [nn.Conv2d(width, width, 3, padding=1),
                       nn.ReLU(inplace=True)]
        layers.append(nn.Conv2d(width, 1, 3, padding=1))
        self.net = nn.Sequential(*layers)

    def forward(self, frames, sigma):
        """frames: (N, window, H, W); sigma: (N,) noise levels in [0, 1].

        The residual is gated by sigma so a zero-noise request is an exact
        identity; the correction fades smoothly as sigma drops.
        """
        noise_map = sigma.view(-1, 1, 1, 1).expand(
            -1, 1, frames.shape[2], frames.shape[3])
        x = torch.cat([frames, noise_map], dim=1)
        center = frames[:, self.window // 2:self.window // 2 + 1]
        gate = (sigma / (sigma + 5e-3)).view(-1, 1, 1, 1)
        return center - gate * self.net(x)


def window_indices(n_frames, window=WINDOW):
    """Clamp-repeated neighbor indices for every frame of a sequence."""
    half = window // 2
    idx = np.arange(n_frames)[:, None] + np.arange(-half, half + 1)[None, :]
    return np.clip(idx, 0, n_frames - 1)


def denoise_cube(model, cube, sigma, device="cpu"):
    """Denoise a (B, H, W) float cube at one noise level; clamps to [0, 1]."""
    frames = torch.from_numpy(np.array(cube, dtype=np.float32, copy=True))
    idx = window_indices(frames.shape[0], model.window)
    batch = frames[torch.from_numpy(idx)].to(device)   # (B, window, H, W)
    sig = torch.full((batch.shape[0],), float(sigma), device=device)
    with torch.no_grad():
        out = model(batch, sig)
    return out[:, 0].clamp_(0.0, 1.0).cpu().numpy()


def load_model(weights_path, device="cpu"):
    state = torch.load(weights_path, map_location=device,
                       weights_only=True)
    meta = state.pop("_meta", {"window": WINDOW, "width": WIDTH,
                               "depth": DEPTH})
    model = WindowDenoiser(window=int(meta["window"]),
                           width=int(meta["width"]),
                           depth=int(meta["depth"]))
    model.load_state_dict(state)
    model.to(device)
    model.eval()
    return model
