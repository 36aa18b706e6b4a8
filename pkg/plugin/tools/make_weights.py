"""Produce the bundled denoiser checkpoint.

Fits the compact temporal-window CNN to synthetic Gaussian-denoising data:
procedurally generated moving scenes (piecewise-constant rectangle worlds,
soft blobs, drifting gratings) corrupted at noise levels spanning the
range an iterative solver asks for.  Fully deterministic per seed; writes
src/scivid_dvdnet/weights/dvdnet_s.pt.

Run from the plugin directory:  python3 tools/make_weights.py
"""

import argparse
import os
import sys
import time

import numpy as np
import torch
import torch.nn.functional as F

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))
from scivid_dvdnet.model import WINDOW, WindowDenoiser  # noqa: E402


def rect_world(rng, size, frames):
    """Moving opaque rectangles over a flat background."""
    clip = np.full((frames, size, size), rng.uniform(0.0, 0.6))
    for _ in range(rng.integers(2, 7)):
        w, h = rng.integers(4, size // 2, size=2)
        x0, y0 = rng.integers(-4, size - 2, size=2)
        vx, vy = rng.integers(-2, 3, size=2)
        level = rng.uniform(0.0, 1.0)
        for t in range(frames):
            xa = int(np.clip(x0 + vx * t, 0, size))
            ya = int(np.clip(y0 + vy * t, 0, size))
            clip[t, xa:min(xa + w, size), ya:min(ya + h, size)] = level
    return clip


def blob_world(rng, size, frames):
    """Soft moving Gaussian blobs."""
    ax = np.arange(size)
    xx, yy = np.meshgrid(ax, ax, indexing="ij")
    clip = np.zeros((frames, size, size))
    base = rng.uniform(0.1, 0.4)
    for _ in range(rng.integers(2, 5)):
        cx, cy = rng.uniform(0, size, size=2)
        vx, vy = rng.uniform(-2, 2, size=2)
        rad = rng.uniform(3, size / 3)
        amp = rng.uniform(-0.5, 0.6)
        for t in range(frames):
            d2 = (xx - cx - vx * t) ** 2 + (yy - cy - vy * t) ** 2
            clip[t] += amp * np.exp(-d2 / (2 * rad * rad))
    return np.clip(base + clip, 0.0, 1.0)


def grating_world(rng, size, frames):
    """Drifting sinusoidal grating, occasionally thresholded to bars."""
    ax = np.arange(size)
    xx, yy = np.meshgrid(ax, ax, indexing="ij")
    theta = rng.uniform(0, np.pi)
    freq = rng.uniform(1.5, 6.0) / size
    drift = rng.uniform(-3, 3)
    hard = rng.random() < 0.4
    clip = np.empty((frames, size, size))
    u = xx * np.cos(theta) + yy * np.sin(theta)
    for t in range(frames):
        wave = np.sin(2 * np.pi * freq * (u + drift * t))
        clip[t] = (wave > 0).astype(float) if hard else 0.5 + 0.5 * wave
    return clip


WORLDS = (rect_world, rect_world, blob_world, grating_world)


def make_batch(rng, batch, size, frames):
    """Noisy windows + clean center targets.

    Corruption mixes i.i.d. Gaussian noise with temporal cross-talk (faint
    blends of neighboring frames), the dominant artifact of iterative
    snapshot-video reconstruction, so the denoiser learns to undo ghosting
    and not just grain.
    """
    clips = np.stack([WORLDS[rng.integers(len(WORLDS))](rng, size, frames)
                      for _ in range(batch)])
    sigma = rng.uniform(0.0, 0.16, size=batch)
    sigma[rng.random(batch) < 0.15] = 0.0
    noisy = clips.copy()
    for i in range(batch):
        if sigma[i] > 0 and rng.random() < 0.5:
            alpha = rng.uniform(0.05, 0.4) * (sigma[i] / 0.16)
            mixed = clips[i][rng.permutation(frames)]
            noisy[i] = (1 - alpha) * clips[i] + alpha * mixed
    noisy += sigma[:, None, None, None] * rng.standard_normal(clips.shape)
    x = torch.from_numpy(noisy.astype(np.float32))
    target = torch.from_numpy(
        clips[:, frames // 2].astype(np.float32)).unsqueeze(1)
    return x, torch.from_numpy(sigma.astype(np.float32)), target


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=3000)
    parser.add_argument("--batch", type=int, default=16)
    parser.add_argument("--size", type=int, default=48)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--out", default=os.path.join(
        os.path.dirname(__file__), "..", "src", "scivid_dvdnet", "weights",
        "dvdnet_s.pt"))
    args = parser.parse_args(argv)

    torch.manual_seed(args.seed)
    rng = np.random.default_rng(args.seed)
    model = WindowDenoiser()
    opt = torch.optim.Adam(model.parameters(), lr=args.lr)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(opt, args.steps)

    t0 = time.time()
    for step in range(1, args.steps + 1):
        x, sigma, target = make_batch(rng, args.batch, args.size, WINDOW)
        out = model(x, sigma)
        loss = F.mse_loss(out, target)
        opt.zero_grad()
        loss.backward()
        opt.step()
        sched.step()
        if step % 200 == 0 or step == 1:
            print(f"step {step:5d}  loss {loss.item():.5f}  "
                  f"({time.time() - t0:.0f}s)")

    os.makedirs(os.path.dirname(args.out), exist_ok=True)
    payload = {"_meta": {"window": WINDOW, "width": model.net[0].out_channels,
                         "depth": (len(model.net) + 2) // 2}}
    payload.update(model.state_dict())
    torch.save(payload, args.out)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
