"""Experiment configuration: flat ``key = value`` text with dotted keys.

One assignment per line, ``#`` starts a comment, nesting is spelled with
dots (``solver.k_max = 160``).  The format is deliberately trivial to parse
from any language.
"""

import math
import shlex
from dataclasses import dataclass, field, asdict

from .denoise import TvStage
from .solver import SolverOptions

__all__ = ["parse_flat_config", "ExperimentConfig"]


def parse_flat_config(text):
    """Parse flat config text into a {key: string} mapping."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', "
                             f"got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ValueError(f"config line {lineno}: empty key")
        if key in out:
            raise ValueError(f"config line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def _as_bool(s):
    low = s.lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _as_floats(s):
    return tuple(float(v) for v in s.split(",") if v.strip() != "")


def _as_strs(s):
    return tuple(v.strip() for v in s.split(",") if v.strip() != "")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a benchmark run needs, with reproducible seeds."""

    scene: str = "moving-square"
    scale: int = 64
    cr: int = 8
    out_dir: str = "runs/out"
    algos: tuple = ("gap-tv",)

    scheme: str = "random-squares"
    mask_seed: int = 1
    density: float = 0.5
    shift_gain: float = 8.0
    grid: tuple = (3, 4)
    margin: int = 0          # 0 -> ceil(shift_gain)
    disc_radius: float = 0.65
    orbit_radius: float = 0.8

    sigmas: tuple = (0.0,)
    noise_seed: int = 7

    solver: SolverOptions = field(default_factory=SolverOptions)
    tv: TvStage = field(default_factory=TvStage)
    plugin_cmd: tuple = ()

    baseline_scheme: str = "single-shift"
    sweep_seeds: int = 3

    def __post_init__(self):
        if self.cr < 1:
            raise ValueError("cr must be >= 1")
        if self.scale < 1:
            raise ValueError("scale must be >= 1")
        if len(self.sigmas) == 0:
            raise ValueError("noise sigma list must be non-empty")
        if len(self.algos) == 0:
            raise ValueError("algorithm list must be non-empty")
        if self.sweep_seeds < 1:
            raise ValueError("sweep_seeds must be >= 1")

    @property
    def mask_margin(self):
        return self.margin if self.margin > 0 else int(
            math.ceil(self.shift_gain))

    def to_dict(self):
        d = asdict(self)
        d["solver"] = asdict(self.solver)
        d["tv"] = asdict(self.tv)
        d["algos"] = list(self.algos)
        d["sigmas"] = list(self.sigmas)
        d["grid"] = list(self.grid)
        d["plugin_cmd"] = list(self.plugin_cmd)
        return d

    @classmethod
    def from_mapping(cls, kv):
        """Build a config from a flat {dotted key: string} mapping."""
        kv = dict(kv)

        def pop(key, conv, default):
            if key in kv:
                return conv(kv.pop(key))
            return default

        k_max = pop("solver.k_max", int, 160)
        solver = SolverOptions(
            k_max=k_max,
            k1=pop("solver.k1", int, k_max),   # default: TV-only (GAP-TV)
            lambda0=pop("solver.lambda0", float, 0.01),
            xi=pop("solver.xi", float, 0.94),
            sigma_floor=pop("solver.sigma_floor", float, 0.0),
            tol=pop("solver.tol", float, 0.0),
            record_trace=pop("solver.record_trace", _as_bool, True),
        )
        tv = TvStage(
            weight=pop("tv.weight", float, 0.1),
            inner_iters=pop("tv.inner_iters", int, 5),
        )
        grid_s = pop("mask.grid", str, "3x4")
        rows, cols = (int(v) for v in grid_s.lower().split("x"))
        cfg = cls(
            scene=pop("scene", str, "moving-square"),
            scale=pop("scale", int, 64),
            cr=pop("cr", int, 8),
            out_dir=pop("out", str, "runs/out"),
            algos=pop("algos", _as_strs, ("gap-tv",)),
            scheme=pop("mask.scheme", str, "random-squares"),
            mask_seed=pop("mask.seed", int, 1),
            density=pop("mask.density", float, 0.5),
            shift_gain=pop("mask.shift_gain", float, 8.0),
            grid=(rows, cols),
            margin=pop("mask.margin", int, 0),
            disc_radius=pop("mask.disc_radius", float, 0.65),
            orbit_radius=pop("mask.orbit_radius", float, 0.8),
            sigmas=pop("noise.sigmas", _as_floats, (0.0,)),
            noise_seed=pop("noise.seed", int, 7),
            solver=solver,
            tv=tv,
            plugin_cmd=pop("plugin.cmd",
               lambda s: tuple(shlex.split(s)), ()),
            baseline_scheme=pop("sweep.baseline_scheme", str, "single-shift"),
            sweep_seeds=pop("sweep.seeds", int, 3),
        )
        if kv:
            raise ValueError(f"unknown config keys: {', '.join(sorted(kv))}")
        return cfg

    @classmethod
    def from_text(cls, text):
        return cls.from_mapping(parse_flat_config(text))

    @classmethod
    def from_file(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())
