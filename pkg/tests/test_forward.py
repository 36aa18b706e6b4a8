"""Sensing operator kernels against the dense-matrix oracle, plus
measurement synthesis and calibration."""

import numpy as np
import pytest

from scivid import (CalibrationDegenerateError, CalibrationSet, MaskStack,
                    Measurement, NoiseModel, OperatorTooLargeError, VideoCube,
                    adjoint_op, calibrate, dense_operator, encode, forward_op,
                    hht_diag, preprocess_measurement)


def random_instance(rng, b=3, nx=4, ny=4):
    masks = MaskStack.from_arrays(rng.random((b, nx, ny)))
    x = rng.random((b, nx, ny))
    y = rng.random((nx, ny))
    return masks, x, y


def vec(cube):
    return np.concatenate([f.ravel() for f in cube])


class TestForwardOp:
    def test_constant_cube_full_masks(self):
        masks = MaskStack.from_arrays(np.ones((5, 4, 4)))
        x = np.full((5, 4, 4), 0.2)
        y = forward_op(x, masks)
        assert np.allclose(y.data, 5 * 0.2)
        assert y.noise_sigma == 0.0

    def test_single_frame_is_hadamard(self):
        rng = np.random.default_rng(0)
        masks, x, _ = random_instance(rng, b=1)
        y = forward_op(x[:1], masks)
        assert np.array_equal(y.data, masks.masks[0] * x[0])

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(1)
        masks, x, _ = random_instance(rng)
        h = dense_operator(masks)
        expect = (h @ vec(x)).reshape(4, 4)
        assert np.allclose(forward_op(x, masks).data, expect, rtol=1e-12)

    def test_dim_mismatch(self):
        rng = np.random.default_rng(2)
        masks, x, _ = random_instance(rng)
        with pytest.raises(ValueError):
            forward_op(x[:2], masks)

    def test_sampling_rate_is_one_over_b(self):
        rng = np.random.default_rng(3)
        for b in (1, 4, 9):
            masks, x, _ = random_instance(rng, b=b)
            y = forward_op(x, masks)
            assert y.data.size * b == x.size


class TestAdjointOp:
    def test_ones(self):
        masks = MaskStack.from_arrays(np.ones((3, 4, 4)))
        out = adjoint_op(np.ones((4, 4)), masks)
        assert np.array_equal(out, np.ones((3, 4, 4)))

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(4)
        masks, _, y = random_instance(rng)
        h = dense_operator(masks)
        expect = (h.T @ y.ravel()).reshape(3, 4, 4)
        assert np.allclose(adjoint_op(y, masks), expect, rtol=1e-12)

    def test_adjoint_identity(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            masks, x, y = random_instance(rng, b=4, nx=5, ny=3)
            lhs = float(np.sum(forward_op(x, masks).data * y))
            rhs = float(np.sum(x * adjoint_op(y, masks)))
            scale = np.linalg.norm(x) * np.linalg.norm(y)
            assert abs(lhs - rhs) <= 1e-10 * scale


class TestHhtDiag:
    def test_full_masks(self):
        masks = MaskStack.from_arrays(np.ones((10, 4, 4)))
        assert np.allclose(hht_diag(masks), 10.0)

    def test_half_mask(self):
        masks = MaskStack.from_arrays(np.full((1, 4, 4), 0.5))
        assert np.allclose(hht_diag(masks), 0.25)

    def test_gram_is_exactly_diagonal(self):
        rng = np.random.default_rng(6)
        masks, _, _ = random_instance(rng)
        h = dense_operator(masks)
        gram = h @ h.T
        assert np.allclose(np.diag(gram), hht_diag(masks).ravel(),
                           rtol=1e-12)
        off = gram - np.diag(np.diag(gram))
        assert np.abs(off).max() == 0.0


class TestDenseOperator:
    def test_identity_for_single_full_mask(self):
        masks = MaskStack.from_arrays(np.ones((1, 3, 3)))
        assert np.array_equal(dense_operator(masks), np.eye(9))

    def test_known_block_layout(self):
        m = np.arange(1, 9, dtype=float).reshape(2, 2, 2) / 10.0
        masks = MaskStack.from_arrays(m)
        h = dense_operator(masks)
        assert h.shape == (4, 8)
        assert np.array_equal(h[:, :4], np.diag(m[0].ravel()))
        assert np.array_equal(h[:, 4:], np.diag(m[1].ravel()))

    def test_row_sums_match_mask_totals(self):
        rng = np.random.default_rng(7)
        masks, _, _ = random_instance(rng)
        h = dense_operator(masks)
        assert np.allclose(h.sum(axis=1),
                           masks.masks.sum(axis=0).ravel(), rtol=1e-12)

    def test_size_guard(self):
        masks = MaskStack.from_arrays(np.ones((1, 65, 64)))
        with pytest.raises(OperatorTooLargeError):
            dense_operator(masks)


class TestEncode:
    def test_zero_sigma_equals_forward(self):
        rng = np.random.default_rng(8)
        masks, x, _ = random_instance(rng)
        clean = forward_op(x, masks)
        noisy = encode(x, masks, NoiseModel(kind="gaussian", sigma=0.0))
        assert np.array_equal(clean.data, noisy.data)

    def test_noise_statistics(self):
        masks = MaskStack.from_arrays(np.ones((1, 128, 128)))
        x = np.full((1, 128, 128), 0.5)
        y = encode(x, masks, NoiseModel(kind="gaussian", sigma=20.0, seed=3))
        noise = y.data - 0.5
        assert y.noise_sigma == 20.0
        var = noise.var()
        expect = (20.0 / 255.0) ** 2
        assert abs(var - expect) <= 0.05 * expect

    def test_seeded_determinism(self):
        rng = np.random.default_rng(9)
        masks, x, _ = random_instance(rng)
        nm = NoiseModel(kind="gaussian", sigma=10.0, seed=42)
        a = encode(x, masks, nm)
        b = encode(x, masks, nm)
        assert np.array_equal(a.data, b.data)

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError):
            NoiseModel(kind="gaussian", sigma=-1.0)


class TestCalibrate:
    def test_identity_illumination(self):
        rng = np.random.default_rng(10)
        true = rng.random((3, 8, 8))
        cs = CalibrationSet(raw_masks=true, illumination=np.ones((8, 8)),
                            background=np.zeros((8, 8)))
        out = calibrate(cs)
        assert np.allclose(out.masks, true, atol=1e-12)
        assert out.meta["guarded_pixels"] == 0

    def test_inverts_vignette_and_background(self):
        rng = np.random.default_rng(11)
        true = rng.random((4, 8, 8))
        vignette = 0.5 + 0.5 * rng.random((8, 8))
        bg = 0.1 * rng.random((8, 8))
        raw = vignette[None] * true + bg[None]
        cs = CalibrationSet(raw_masks=raw, illumination=vignette + bg,
                            background=bg)
        out = calibrate(cs)
        assert np.abs(out.masks - true).max() <= 1e-10

    def test_degenerate_illumination(self):
        img = np.full((8, 8), 0.3)
        cs = CalibrationSet(raw_masks=np.ones((2, 8, 8)) * 0.3,
                            illumination=img, background=img)
        with pytest.raises(CalibrationDegenerateError):
            calibrate(cs)

    def test_guarded_pixels_zero_filled_and_counted(self):
        illum = np.ones((10, 10))
        illum[0, 0] = 0.0  # one dark pixel, under the 1% default
        cs = CalibrationSet(raw_masks=np.full((1, 10, 10), 0.5),
                            illumination=illum,
                            background=np.zeros((10, 10)))
        out = calibrate(cs)
        assert out.masks[0, 0, 0] == 0.0
        assert out.meta["guarded_pixels"] == 1


class TestPreprocessMeasurement:
    def test_zero_background(self):
        y = np.random.default_rng(12).random((6, 6))
        out = preprocess_measurement(y, np.zeros((6, 6)))
        assert np.array_equal(out.data, y)
        assert out.background_subtracted

    def test_background_equal_measurement(self):
        bg = np.full((6, 6), 0.2)
        out = preprocess_measurement(bg.copy(), bg)
        assert np.all(out.data == 0.0)

    def test_recovers_clean_signal(self):
        rng = np.random.default_rng(13)
        y_true = rng.random((6, 6))
        bg = rng.random((6, 6)) * 0.3
        out = preprocess_measurement(y_true + bg, bg)
        assert np.allclose(out.data, y_true, atol=1e-12)


class TestTypes:
    def test_video_cube_range_check(self):
        with pytest.raises(ValueError):
            VideoCube(data=np.full((2, 4, 4), 1.5))

    def test_measurement_sigma_check(self):
        with pytest.raises(ValueError):
            Measurement(data=np.zeros((4, 4)), noise_sigma=-0.1)

    def test_calibration_set_dims(self):
        with pytest.raises(ValueError):
            CalibrationSet(raw_masks=np.ones((2, 4, 4)),
                           illumination=np.ones((5, 5)),
                           background=np.zeros((4, 4)))
