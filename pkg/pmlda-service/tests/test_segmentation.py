import numpy as np
import pytest

from app.models.domain import DocLayout, MembershipMap
from app.services.segmentation import UNCOVERED, assemble_maps, crisp_map, transition_map
from app.utils.errors import InputError
from tests.conftest import random_simplex


def pixel_map(values):
    """1 x n map from per-pixel membership vectors."""
    values = np.asarray(values, dtype=np.float64).T[:, None, :]
    return MembershipMap(values, np.ones(values.shape[1:], dtype=bool))


class TestAssembleMaps:
    def test_non_overlapping_layout(self, rng):
        layout = DocLayout([[[0, 0], [0, 1]], [[1, 0], [1, 1]]], 2, 2)
        Z = [random_simplex(rng, 3, 2), random_simplex(rng, 3, 2)]
        mmap = assemble_maps(Z, layout, 2, 2)
        assert mmap.coverage.all()
        np.testing.assert_array_equal(mmap.values[:, 0, 1], Z[0][1])
        np.testing.assert_array_equal(mmap.values[:, 1, 0], Z[1][0])

    def test_overlap_is_averaged(self):
        layout = DocLayout([[[0, 0]], [[0, 0]]], 1, 1)
        mmap = assemble_maps([np.array([[0.2, 0.8]]), np.array([[0.4, 0.6]])], layout, 1, 1)
        np.testing.assert_allclose(mmap.values[:, 0, 0], [0.3, 0.7])

    def test_covered_pixels_stay_on_simplex(self, rng):
        coords = [np.array([[r, c] for r in range(r0, r0 + 3) for c in range(c0, c0 + 3)])
                  for r0 in range(3) for c0 in range(3)]
        layout = DocLayout(coords, 5, 5)
        mmap = assemble_maps([random_simplex(rng, 4, 9) for _ in coords], layout, 5, 5)
        np.testing.assert_allclose(mmap.values.sum(axis=0)[mmap.coverage], 1.0, atol=1e-6)

    def test_uncovered_pixels_flagged(self):
        layout = DocLayout([[[0, 0]]], 1, 2)
        mmap = assemble_maps([np.array([[0.5, 0.5]])], layout, 1, 2)
        assert mmap.coverage.tolist() == [[True, False]]
        assert crisp_map(mmap)[0, 1] == UNCOVERED
        np.testing.assert_array_equal(mmap.values[:, 0, 1], 0.0)

    def test_size_mismatch(self):
        layout = DocLayout([[[0, 0]]], 2, 2)
        with pytest.raises(InputError):
            assemble_maps([np.array([[0.5, 0.5]])], layout, 3, 3)

    def test_word_count_mismatch(self):
        layout = DocLayout([[[0, 0], [0, 1]]], 2, 2)
        with pytest.raises(InputError):
            assemble_maps([np.array([[0.5, 0.5]])], layout, 2, 2)

    def test_layout_rejects_out_of_bounds_and_repeats(self):
        with pytest.raises(InputError):
            DocLayout([[[0, 2]]], 2, 2)
        with pytest.raises(InputError):
            DocLayout([[[0, 0], [0, 0]]], 2, 2)


class TestCrispMap:
    def test_argmax(self):
        assert crisp_map(pixel_map([[0.7, 0.2, 0.1]]))[0, 0] == 0

    def test_ties_go_to_lowest_index(self):
        assert crisp_map(pixel_map([[0.5, 0.5, 0.0]]))[0, 0] == 0

    def test_invariant_to_positive_rescaling(self, rng):
        values = random_simplex(rng, 3, 30)
        scale = rng.uniform(0.1, 10.0, size=(30, 1))
        np.testing.assert_array_equal(crisp_map(pixel_map(values)), crisp_map(pixel_map(values * scale)))


class TestTransitionMap:
    def test_inside_band(self):
        assert transition_map(pixel_map([[0.55, 0.45]]))[0, 0]

    def test_vertex(self):
        assert not transition_map(pixel_map([[1.0, 0.0]]))[0, 0]

    def test_just_outside_band(self):
        assert not transition_map(pixel_map([[0.39, 0.61]]))[0, 0]

    def test_band_order(self):
        with pytest.raises(InputError):
            transition_map(pixel_map([[0.5, 0.5]]), lo=0.7, hi=0.3)

    def test_consistent_with_crisp_map(self, rng):
        mmap = pixel_map(random_simplex(rng, 2, 500))
        mask = transition_map(mmap)
        winning = np.take_along_axis(mmap.values, crisp_map(mmap)[None], axis=0)[0]
        assert np.all(winning[mask] < 0.61)
