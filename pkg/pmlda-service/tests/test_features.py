import numpy as np
import pytest
from scipy import ndimage

from app.models.domain import FeatureImage
from app.services.features import (
    extract_filter_bank,
    extract_gradient_color,
    extract_intensity_entropy,
    filter_bank,
    group_by_labels,
    histogram_entropy,
    tile_documents,
)
from app.utils import kernels
from app.utils.errors import InputError


class TestHistogramEntropy:
    def test_constant(self):
        assert histogram_entropy(np.full(441, 128)) == 0.0

    def test_two_symbol_uniform(self):
        assert histogram_entropy([0] * 50 + [255] * 50) == pytest.approx(1.0, abs=1e-12)

    def test_three_to_one(self):
        assert histogram_entropy([10] * 300 + [200] * 100) == pytest.approx(0.811278, abs=1e-6)


class TestIntensityEntropy:
    def test_constant_image(self):
        fimg = extract_intensity_entropy(np.full((30, 30), 128, dtype=np.uint8))
        assert fimg.dim == 2
        np.testing.assert_allclose(fimg.data[:, :, 0], 128 / 255 * 10, atol=1e-12)
        np.testing.assert_allclose(fimg.data[:, :, 1], 0.0, atol=1e-12)

    def test_matches_replicate_padded_oracle(self, rng):
        image = rng.choice(np.array([0, 40, 200, 255], dtype=np.uint8), size=(12, 15))
        window, half = 5, 2
        fimg = extract_intensity_entropy(image, window=window, intensity_scale=10)
        padded = np.pad(image, half, mode="edge")
        for r in range(image.shape[0]):
            for c in range(image.shape[1]):
                patch = padded[r:r + window, c:c + window]
                assert fimg.data[r, c, 0] == pytest.approx(patch.mean() / 255 * 10, abs=1e-9)
                assert fimg.data[r, c, 1] == pytest.approx(histogram_entropy(patch), abs=1e-9)

    def test_window_on_an_edge(self):
        # 3x3 window on the first bright row: one dark row, two bright rows
        image = np.zeros((6, 8), dtype=np.uint8)
        image[3:] = 255
        fimg = extract_intensity_entropy(image, window=3)
        expected = histogram_entropy([0] * 3 + [255] * 6)
        assert fimg.data[3, 4, 1] == pytest.approx(expected, abs=1e-12)

    def test_window_validation(self):
        image = np.zeros((10, 10), dtype=np.uint8)
        with pytest.raises(InputError):
            extract_intensity_entropy(image, window=4)
        with pytest.raises(InputError):
            extract_intensity_entropy(image, window=11)
        with pytest.raises(InputError):
            extract_intensity_entropy(image.astype(np.float64), window=3)


class TestGradientColor:
    def test_constant_image(self):
        fimg = extract_gradient_color(np.full((20, 20, 3), 90, dtype=np.uint8))
        np.testing.assert_allclose(fimg.data[:, :, 0], 0.0, atol=1e-12)

    def test_pure_red(self):
        image = np.zeros((10, 10, 3), dtype=np.uint8)
        image[:, :, 0] = 255
        fimg = extract_gradient_color(image)
        np.testing.assert_allclose(fimg.data, np.broadcast_to([0.0, 1.0, 0.0], fimg.data.shape), atol=1e-12)

    def test_vertical_ramp_slope(self):
        c, sigma = 0.01, 2.0
        ramp = np.repeat((c * np.arange(40, dtype=np.float64))[:, None], 10, axis=1)
        fimg = extract_gradient_color(np.stack([ramp] * 3, axis=-1), sigma=sigma)
        half = (kernels.truncated_size(sigma) - 1) // 2
        np.testing.assert_allclose(fimg.data[half:40 - half, :, 0], c, atol=1e-6)

    def test_requires_rgb(self):
        with pytest.raises(InputError):
            extract_gradient_color(np.zeros((5, 5), dtype=np.uint8))


class TestFilterBank:
    def test_dimension(self, rng):
        fimg = extract_filter_bank(rng.integers(0, 256, size=(20, 20), dtype=np.uint8))
        assert fimg.dim == 11
        assert fimg.provenance["channels"][:3] == ["gaussian_1", "gaussian_2", "gaussian_4"]

    def test_constant_image(self):
        fimg = extract_filter_bank(np.full((25, 25), 0.5))
        np.testing.assert_allclose(fimg.data[:, :, :3], 0.5, atol=1e-12)
        np.testing.assert_allclose(fimg.data[:, :, 3:], 0.0, atol=1e-12)

    def test_impulse_reproduces_kernels(self):
        image = np.zeros((31, 31))
        image[15, 15] = 1.0
        fimg = extract_filter_bank(image)
        for channel, (_, kernel) in enumerate(filter_bank()):
            np.testing.assert_allclose(fimg.data[8:23, 8:23, channel], kernel, atol=1e-15)

    def test_derivative_kernels_are_unit_slope(self):
        x = np.arange(-7, 8, dtype=np.float64)
        for sigma in (2.0, 4.0):
            k = kernels.derivative_2d(sigma, axis=0)
            assert k.sum() == pytest.approx(0.0, abs=1e-14)
            assert -np.sum(x[:, None] * k) == pytest.approx(1.0, abs=1e-12)

    def test_replicate_padding_oracle(self, rng):
        image = rng.uniform(size=(18, 21))
        fimg = extract_filter_bank(image)
        padded = np.pad(image, 7, mode="edge")
        for channel, (_, kernel) in enumerate(filter_bank()):
            full = ndimage.convolve(padded, kernel, mode="constant")
            np.testing.assert_allclose(fimg.data[:, :, channel], full[7:-7, 7:-7], atol=1e-12)

    def test_translation_consistency(self, rng):
        image = rng.uniform(size=(40, 40))
        shifted = np.roll(image, (3, 2), axis=(0, 1))
        a = extract_filter_bank(image).data
        b = extract_filter_bank(shifted).data
        np.testing.assert_allclose(b[12:30, 12:30], a[9:27, 10:28], atol=1e-12)


class TestDocuments:
    def fimg(self, h=4, w=4, dim=2):
        return FeatureImage(np.arange(h * w * dim, dtype=np.float64).reshape(h, w, dim))

    def test_exact_tiling(self):
        corpus, layout = tile_documents(self.fimg(), 2, 2)
        assert len(corpus) == 4 and all(doc.N == 4 for doc in corpus)
        covered = np.vstack(layout.coords)
        assert np.unique(covered[:, 0] * 4 + covered[:, 1]).size == 16

    def test_overlapping_windows(self):
        corpus, _ = tile_documents(self.fimg(), 2, 1)
        assert len(corpus) == 9

    def test_layout_round_trip(self):
        fimg = self.fimg()
        corpus, layout = tile_documents(fimg, 2, 1)
        for doc, coords in zip(corpus, layout.coords):
            np.testing.assert_array_equal(doc.words, fimg.data[coords[:, 0], coords[:, 1]])

    def test_window_too_large(self):
        with pytest.raises(InputError):
            tile_documents(self.fimg(), 5, 1)

    def test_uniform_labels(self):
        corpus, layout = group_by_labels(self.fimg(), np.zeros((4, 4), dtype=int))
        assert len(corpus) == 1 and corpus[0].N == 16

    def test_three_superpixels(self):
        labels = np.array([[0, 0, 1, 1], [0, 0, 1, 1], [2, 2, 2, 1], [2, 2, 2, 2]])
        fimg = self.fimg()
        corpus, layout = group_by_labels(fimg, labels)
        assert [doc.N for doc in corpus] == [4, 5, 7]
        for doc, coords, label in zip(corpus, layout.coords, (0, 1, 2)):
            assert np.all(labels[coords[:, 0], coords[:, 1]] == label)
            np.testing.assert_array_equal(doc.words, fimg.data[coords[:, 0], coords[:, 1]])

    def test_label_shape_mismatch(self):
        with pytest.raises(InputError):
            group_by_labels(self.fimg(), np.zeros((3, 4), dtype=int))
