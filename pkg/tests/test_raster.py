import numpy as np
import pytest
from PIL import Image

from oracles import brute_median_filter, brute_wiener_filter
from wbnd import (
    CorruptHeaderError,
    NoiseSpec,
    UnsupportedFormatError,
    add_gaussian_noise,
    load_binary_map,
    load_image,
    log_transform,
    median_filter,
    save_binary_map,
    wiener_filter,
)


def write_pgm(path, width, height, data: bytes, maxval=255):
    path.write_bytes(f"P5\n{width} {height}\n{maxval}\n".encode() + data)


class TestLoadImage:
    def test_2x2_pgm_preserves_values(self, tmp_path):
        p = tmp_path / "a.pgm"
        write_pgm(p, 2, 2, bytes([0, 255, 128, 7]))
        img = load_image(p)
        np.testing.assert_array_equal(img, [[0.0, 255.0], [128.0, 7.0]])

    def test_1x1_pgm(self, tmp_path):
        p = tmp_path / "a.pgm"
        write_pgm(p, 1, 1, bytes([0]))
        np.testing.assert_array_equal(load_image(p), [[0.0]])

    def test_16bit_pgm(self, tmp_path):
        p = tmp_path / "a.pgm"
        write_pgm(p, 2, 1, (1000).to_bytes(2, "big") + (65535).to_bytes(2, "big"), maxval=65535)
        np.testing.assert_array_equal(load_image(p), [[1000.0, 65535.0]])

    def test_header_comments(self, tmp_path):
        p = tmp_path / "a.pgm"
        p.write_bytes(b"P5\n# a comment\n2 1\n# another\n255\n" + bytes([3, 4]))
        np.testing.assert_array_equal(load_image(p), [[3.0, 4.0]])

    def test_grayscale_png(self, tmp_path):
        p = tmp_path / "a.png"
        Image.fromarray(np.arange(6, dtype=np.uint8).reshape(2, 3), mode="L").save(p)
        np.testing.assert_array_equal(load_image(p), np.arange(6).reshape(2, 3))

    def test_rgb_png_rejected(self, tmp_path):
        p = tmp_path / "a.png"
        Image.fromarray(np.zeros((2, 2, 3), dtype=np.uint8), mode="RGB").save(p)
        with pytest.raises(UnsupportedFormatError, match="unsupported format"):
            load_image(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_image(tmp_path / "missing.pgm")

    def test_truncated_payload(self, tmp_path):
        p = tmp_path / "a.pgm"
        write_pgm(p, 4, 4, bytes([1, 2, 3]))
        with pytest.raises(CorruptHeaderError, match="truncated"):
            load_image(p)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "a.pgm"
        p.write_bytes(b"XY junk")
        with pytest.raises(CorruptHeaderError):
            load_image(p)

    def test_color_pnm_unsupported(self, tmp_path):
        p = tmp_path / "a.pgm"
        p.write_bytes(b"P6\n2 2\n255\n" + bytes(12))
        with pytest.raises(UnsupportedFormatError):
            load_image(p)

    def test_unknown_suffix(self, tmp_path):
        p = tmp_path / "a.tiff"
        p.write_bytes(b"whatever")
        with pytest.raises(UnsupportedFormatError):
            load_image(p)


class TestSaveBinaryMap:
    def test_all_false_is_zero_bytes(self, tmp_path):
        p = tmp_path / "m.pgm"
        save_binary_map(np.zeros((3, 3), dtype=bool), p)
        assert p.read_bytes().endswith(bytes(9))

    def test_all_true_is_255_bytes(self, tmp_path):
        p = tmp_path / "m.pgm"
        save_binary_map(np.ones((1, 2), dtype=bool), p)
        assert p.read_bytes().endswith(bytes([255, 255]))

    def test_round_trip_random_map(self, tmp_path, rng):
        labels = rng.random((16, 16)) < 0.4
        p = tmp_path / "m.pgm"
        save_binary_map(labels, p)
        np.testing.assert_array_equal(load_binary_map(p), labels)


class TestLogTransform:
    def test_zero_maps_to_zero(self):
        assert log_transform([[0.0]])[0, 0] == 0.0

    def test_e_minus_one_maps_to_one(self):
        np.testing.assert_allclose(log_transform([[np.e - 1.0]])[0, 0], 1.0, rtol=1e-15)

    def test_inverse_identity(self, rng):
        img = rng.random((12, 9)) * 255
        np.testing.assert_allclose(np.expm1(log_transform(img)), img, rtol=1e-12)

    def test_strictly_monotone(self, rng):
        v = np.sort(rng.random(50) * 300)
        out = log_transform(v[None, :])[0]
        assert np.all(np.diff(out) > 0)

    def test_negative_pixel_reports_coordinates(self):
        img = np.zeros((3, 4))
        img[1, 2] = -5.0
        with pytest.raises(ValueError, match=r"row=1, col=2"):
            log_transform(img)


class TestGaussianNoise:
    def test_sigma_zero_is_identity(self, rng):
        img = rng.random((8, 8))
        np.testing.assert_array_equal(add_gaussian_noise(img, NoiseSpec(0.0, 3)), img)

    def test_same_seed_bitwise_identical(self, rng):
        img = rng.random((16, 16))
        spec = NoiseSpec(sigma=10.0, seed=123)
        a = add_gaussian_noise(img, spec)
        b = add_gaussian_noise(img, spec)
        np.testing.assert_array_equal(a, b)

    def test_sample_statistics(self):
        out = add_gaussian_noise(np.zeros((256, 256)), NoiseSpec(sigma=30.0, seed=9))
        assert abs(out.std() - 30.0) < 0.5
        assert abs(out.mean()) < 0.5

    def test_different_seeds_differ(self):
        img = np.zeros((8, 8))
        a = add_gaussian_noise(img, NoiseSpec(5.0, 1))
        b = add_gaussian_noise(img, NoiseSpec(5.0, 2))
        assert not np.array_equal(a, b)


class TestWienerFilter:
    def test_constant_image_unchanged(self):
        img = np.full((10, 10), 42.0)
        np.testing.assert_array_equal(wiener_filter(img, 3), img)

    def test_impulse_attenuated_matches_oracle(self):
        img = np.zeros((5, 5))
        img[2, 2] = 1.0
        out = wiener_filter(img, 3)
        np.testing.assert_allclose(out, brute_wiener_filter(img, 3), atol=1e-12)
        assert out[2, 2] < 1.0

    def test_zero_noise_limit_is_identity(self):
        ramp = np.add.outer(np.arange(9.0), np.arange(9.0))
        np.testing.assert_allclose(wiener_filter(ramp, 3, noise_var=0.0), ramp, atol=1e-12)

    def test_window_validation(self):
        with pytest.raises(ValueError):
            wiener_filter(np.zeros((5, 5)), 4)
        with pytest.raises(ValueError):
            wiener_filter(np.zeros((5, 5)), 1)

    def test_no_nan_on_noise(self, rng):
        out = wiener_filter(rng.normal(size=(20, 20)), 5)
        assert np.isfinite(out).all()


class TestMedianFilter:
    def test_constant_image_unchanged(self):
        img = np.full((7, 7), 3.0)
        np.testing.assert_array_equal(median_filter(img, 3), img)

    def test_single_impulse_removed(self):
        img = np.zeros((7, 7))
        img[3, 3] = 100.0
        np.testing.assert_array_equal(median_filter(img, 3), np.zeros((7, 7)))

    def test_matches_brute_force(self, rng):
        img = rng.random((8, 8))
        np.testing.assert_allclose(median_filter(img, 3), brute_median_filter(img, 3), atol=0)

    def test_even_window_rejected(self):
        with pytest.raises(ValueError):
            median_filter(np.zeros((5, 5)), 2)
