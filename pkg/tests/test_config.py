"""Flat config parsing and the experiment config mapping."""

import pytest

from scivid import ExperimentConfig, parse_flat_config

SAMPLE = """
# benchmark setup
scene = moving-square
scale = 64
cr = 8                      # frames per snapshot
out = runs/demo
algos = gap-tv, pnp-tv-echo

mask.scheme = random-squares
mask.seed = 3
mask.shift_gain = 8
mask.grid = 3x4

noise.sigmas = 0, 5, 10
noise.seed = 11

solver.k_max = 60
solver.k1 = 40
solver.lambda0 = 0.01
solver.xi = 0.95
tv.weight = 0.1
tv.inner_iters = 5
"""


class TestParser:
    def test_key_values_and_comments(self):
        kv = parse_flat_config(SAMPLE)
        assert kv["scene"] == "moving-square"
        assert kv["cr"] == "8"
        assert kv["mask.grid"] == "3x4"
        assert "# benchmark setup" not in kv

    def test_rejects_bad_line(self):
        with pytest.raises(ValueError, match="key = value"):
            parse_flat_config("just a line\n")

    def test_rejects_duplicate_key(self):
        with pytest.raises(ValueError, match="duplicate"):
            parse_flat_config("a = 1\na = 2\n")


class TestExperimentConfig:
    def test_from_text(self):
        cfg = ExperimentConfig.from_text(SAMPLE)
        assert cfg.scale == 64
        assert cfg.cr == 8
        assert cfg.algos == ("gap-tv", "pnp-tv-echo")
        assert cfg.sigmas == (0.0, 5.0, 10.0)
        assert cfg.solver.k_max == 60
        assert cfg.solver.k1 == 40
        assert cfg.grid == (3, 4)
        assert cfg.tv.weight == 0.1

    def test_k1_defaults_to_k_max(self):
        cfg = ExperimentConfig.from_text("solver.k_max = 42\n")
        assert cfg.solver.k1 == 42

    def test_margin_derived_from_shift_gain(self):
        cfg = ExperimentConfig.from_text("mask.shift_gain = 6.5\n")
        assert cfg.mask_margin == 7

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown config keys"):
            ExperimentConfig.from_text("solver.kmax = 10\n")

    def test_round_trips_through_dict(self):
        cfg = ExperimentConfig.from_text(SAMPLE)
        d = cfg.to_dict()
        assert d["solver"]["k_max"] == 60
        assert d["sigmas"] == [0.0, 5.0, 10.0]

    def test_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(cr=0)
        with pytest.raises(ValueError):
            ExperimentConfig(sigmas=())

    def test_from_file(self, tmp_path):
        p = tmp_path / "exp.cfg"
        p.write_text(SAMPLE)
        assert ExperimentConfig.from_file(p).noise_seed == 11
