"""Scene generators and dataset ingestion."""

import numpy as np
import pytest
from PIL import Image

from scivid import load_scene, save_tensor
from scivid.scenes import drifting_sinusoid, moving_square, rotating_bars


class TestGenerators:
    def test_moving_square_offsets(self):
        cube = moving_square(64, 8)
        start = 8
        side = 8
        for k in range(8):
            frame = np.zeros((64, 64))
            frame[start + k:start + k + side,
                  start + k:start + k + side] = 1.0
            assert np.array_equal(cube[k], frame)

    def test_moving_square_stays_in_bounds(self):
        cube = moving_square(16, 30)
        assert cube.shape == (30, 16, 16)
        assert np.all(cube[29].sum() > 0)

    def test_values_in_unit_interval(self):
        for cube in (moving_square(32, 4), drifting_sinusoid(32, 4),
                     rotating_bars(32, 4)):
            assert cube.min() >= 0.0 and cube.max() <= 1.0

    def test_frames_differ(self):
        for cube in (moving_square(32, 4), drifting_sinusoid(32, 4),
                     rotating_bars(32, 4)):
            assert np.linalg.norm(cube[0] - cube[1]) > 0


class TestLoadScene:
    def test_builtin(self):
        assert load_scene("moving-square", 32, 5).shape == (5, 32, 32)

    def test_vsct_at_target_dims_is_bitwise(self, tmp_path):
        cube = np.random.default_rng(0).random((4, 16, 16)).astype(
            np.float32)
        path = tmp_path / "scene.vsct"
        save_tensor(path, cube)
        back = load_scene(str(path), 16, 4)
        assert np.array_equal(back, cube.astype(np.float64))

    def test_vsct_center_crop_and_frame_trim(self, tmp_path):
        cube = np.random.default_rng(1).random((6, 20, 20)).astype(
            np.float32)
        path = tmp_path / "scene.vsct"
        save_tensor(path, cube)
        back = load_scene(str(path), 16, 4)
        assert back.shape == (4, 16, 16)
        assert np.allclose(back, cube[:4, 2:18, 2:18])

    def test_image_sequence_gray_and_fullscale(self, tmp_path):
        d = tmp_path / "frames"
        d.mkdir()
        for k in range(3):
            arr = np.full((16, 16), 255 if k == 0 else 100, dtype=np.uint8)
            Image.fromarray(arr, mode="L").save(d / f"frame_{k:03d}.png")
        cube = load_scene(str(d), 16, 3)
        assert cube[0].max() == 1.0  # 8-bit 255 maps to exactly 1.0
        assert np.allclose(cube[1], 100 / 255)

    def test_color_images_use_luma(self, tmp_path):
        d = tmp_path / "frames"
        d.mkdir()
        rgb = np.zeros((16, 16, 3), dtype=np.uint8)
        rgb[..., 0] = 255  # pure red
        Image.fromarray(rgb, mode="RGB").save(d / "f0.png")
        cube = load_scene(str(d), 16, 1)
        assert np.allclose(cube[0], 0.299)

    def test_insufficient_frames(self, tmp_path):
        path = tmp_path / "scene.vsct"
        save_tensor(path, np.zeros((2, 16, 16), np.float32))
        with pytest.raises(ValueError, match="frames"):
            load_scene(str(path), 16, 4)

    def test_too_small_resolution(self, tmp_path):
        path = tmp_path / "scene.vsct"
        save_tensor(path, np.zeros((4, 8, 8), np.float32))
        with pytest.raises(ValueError, match="scale"):
            load_scene(str(path), 16, 4)

    def test_unknown_source(self):
        with pytest.raises(ValueError, match="unknown scene"):
            load_scene("no-such-scene", 16, 4)
