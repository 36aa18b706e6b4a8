"""Command-line entry points for simulation, reconstruction and benchmarks."""

import argparse
import json
import os
import shlex
import sys
from dataclasses import replace

import numpy as np

from . import vsct
from .bench import build_masks, compare_masks_noise_sweep, make_chain, \
    run_experiment, solver_opts_for
from .config import ExperimentConfig
from .forward import CalibrationSet, NoiseModel, calibrate, encode
from .metrics import evaluate
from .scenes import BUILTIN_SCENES, load_scene
from .solver import run_gap


def _load_config(args):
    cfg = (ExperimentConfig.from_file(args.config) if args.config
           else ExperimentConfig())
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, mask_seed=args.seed)
    if getattr(args, "out", None):
        cfg = replace(cfg, out_dir=args.out)
    return cfg


def _plugin_cmd(args):
    return shlex.split(args.plugin) if args.plugin else None


def _cmd_make_scene(args):
    cube = load_scene(args.scene, args.scale, args.frames)
    vsct.save_tensor(args.out, cube)
    print(f"wrote {args.out}: {cube.shape[0]} frames of "
          f"{cube.shape[1]}x{cube.shape[2]}")
    return 0


def _cmd_simulate(args):
    cfg = _load_config(args)
    os.makedirs(cfg.out_dir, exist_ok=True)
    truth = load_scene(cfg.scene, cfg.scale, cfg.cr)
    stack = build_masks(cfg)
    sigma = cfg.sigmas[0]
    noise = NoiseModel(kind="gaussian" if sigma > 0 else "none",
                       sigma=sigma, seed=cfg.noise_seed)
    y = encode(truth, stack, noise)
    vsct.save_tensor(os.path.join(cfg.out_dir, "truth.vsct"), truth)
    vsct.save_tensor(os.path.join(cfg.out_dir, "masks.vsct"), stack.masks)
    vsct.save_tensor(os.path.join(cfg.out_dir, "measurement.vsct"), y.data)
    print(f"wrote truth/masks/measurement to {cfg.out_dir} "
          f"(sigma={sigma:g}, scheme={stack.provenance})")
    return 0


def _cmd_reconstruct(args):
    cfg = _load_config(args)
    os.makedirs(cfg.out_dir, exist_ok=True)
    in_dir = args.in_dir or cfg.out_dir
    y = vsct.load_tensor(os.path.join(in_dir, "measurement.vsct"))
    masks = vsct.load_tensor(os.path.join(in_dir, "masks.vsct"))
    algo = args.algo or cfg.algos[0]
    chain = make_chain(cfg, algo, _plugin_cmd(args))
    result = run_gap(y, masks, chain, solver_opts_for(cfg, algo))
    vsct.save_tensor(os.path.join(cfg.out_dir, "recon.vsct"), result.video)
    info = {"algorithm": algo, "iterations_run": result.iterations_run,
            "residual_trace": list(result.residual_trace)}
    truth_path = os.path.join(in_dir, "truth.vsct")
    if os.path.exists(truth_path):
        truth = vsct.load_tensor(truth_path)
        info.update(evaluate(truth, result.video).to_dict())
        print(f"reconstructed {result.video.shape}: "
              f"psnr {info['psnr_mean']:.2f} dB, "
              f"ssim {info['ssim_mean']:.4f}")
    else:
        print(f"reconstructed {result.video.shape}")
    with open(os.path.join(cfg.out_dir, "report.json"), "w",
              encoding="utf-8") as fh:
        json.dump(info, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def _cmd_bench(args):
    cfg = _load_config(args)
    report = run_experiment(cfg, plugin_cmd=_plugin_cmd(args), verbose=True)
    failed = [c for c in report["cells"] if c.get("error")]
    print(f"report written to {os.path.join(cfg.out_dir, 'report.json')} "
          f"({len(report['cells'])} cells, {len(failed)} failed)")
    return 1 if failed else 0


def _cmd_noise_sweep(args):
    cfg = _load_config(args)
    summary = compare_masks_noise_sweep(cfg, verbose=True)
    diffs = ", ".join(f"{s:g}:{d:+.2f}" for s, d in
                      zip(summary["sigmas"], summary["psnr_difference"]))
    print(f"psnr(multiplexed) - psnr(baseline) per sigma: {diffs}")
    print(f"crossover sigma: {summary['crossover_sigma']}")
    return 0


def _cmd_calibrate(args):
    raws = []
    k = 0
    while True:
        path = os.path.join(args.in_dir, f"raw_{k:03d}.vsct")
        if not os.path.exists(path):
            break
        raws.append(vsct.load_tensor(path))
        k += 1
    if not raws:
        print(f"no raw_000.vsct... found in {args.in_dir}", file=sys.stderr)
        return 1
    illum = vsct.load_tensor(os.path.join(args.in_dir, "illum.vsct"))
    bg = vsct.load_tensor(os.path.join(args.in_dir, "background.vsct"))
    calset = CalibrationSet(raw_masks=np.stack(raws), illumination=illum,
                            background=bg, epsilon=args.epsilon)
    stack = calibrate(calset)
    vsct.save_tensor(args.out, stack.masks)
    print(f"wrote {args.out}: {stack.n_frames} masks, "
          f"{stack.meta['guarded_pixels']} guarded pixels "
          f"({stack.meta['guarded_fraction']:.3%})")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="scivid",
        description="Snapshot compressive video: simulate coded captures "
                    "and reconstruct them with GAP plug-and-play solvers.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default=None):
        p.add_argument("--config", default=None, help="flat key=value file")
        p.add_argument("--out", default=out_default, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the mask seed")

    p = sub.add_parser("make-scene", help="write a builtin scene as VSCT")
    p.add_argument("--scene", default="moving-square",
                   choices=sorted(BUILTIN_SCENES))
    p.add_argument("--scale", type=int, default=64)
    p.add_argument("--frames", type=int, default=8)
    p.add_argument("--out", required=True, help="output .vsct path")
    p.set_defaults(func=_cmd_make_scene)

    p = sub.add_parser("simulate", help="encode a scene into a snapshot")
    common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("reconstruct", help="invert a saved measurement")
    common(p)
    p.add_argument("--in", dest="in_dir", default=None,
                   help="directory holding measurement.vsct and masks.vsct")
    p.add_argument("--algo", choices=["gap-tv", "pnp-tv-plugin"],
                   default=None)
    p.add_argument("--plugin", default=None,
                   help="denoiser plugin command line (one shell-style string)")
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("bench", help="run the full benchmark grid")
    common(p)
    p.add_argument("--plugin", default=None)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("noise-sweep",
                       help="multiplexed vs baseline masks over noise")
    common(p)
    p.set_defaults(func=_cmd_noise_sweep)

    p = sub.add_parser("calibrate", help="normalize captured mask images")
    p.add_argument("--in", dest="in_dir", required=True,
                   help="directory of raw_000.vsct..., illum.vsct, "
                        "background.vsct")
    p.add_argument("--out", required=True, help="output .vsct path")
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.set_defaults(func=_cmd_calibrate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
