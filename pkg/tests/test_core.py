import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ucal import RngStream, mean_of_counts, one_hot, uniform_point, validate_simplex


class TestMeanOfCounts:
    def test_basic(self):
        np.testing.assert_allclose(mean_of_counts([3, 1]), [0.75, 0.25])

    def test_degenerate_vertex(self):
        np.testing.assert_allclose(mean_of_counts([0, 5]), [0.0, 1.0])

    def test_symmetric(self):
        np.testing.assert_allclose(mean_of_counts([2, 2, 2]), [1 / 3, 1 / 3, 1 / 3])

    def test_empty_history(self):
        with pytest.raises(ValueError, match="empty history"):
            mean_of_counts([0, 0, 0])

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            mean_of_counts([3, -1])

    @given(st.lists(st.integers(min_value=0, max_value=3), min_size=2, max_size=500)
           .map(lambda idx: (idx, 4)))
    def test_running_average_of_one_hots(self, case):
        indices, k = case
        counts = np.zeros(k, dtype=np.int64)
        total = np.zeros(k)
        for y in indices:
            counts[y] += 1
            total += one_hot(y, k)
            np.testing.assert_allclose(mean_of_counts(counts), total / counts.sum(),
                                       atol=1e-12)


class TestValidateSimplex:
    def test_accepts(self):
        np.testing.assert_allclose(validate_simplex([0.5, 0.5]), [0.5, 0.5])

    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError, match="sum"):
            validate_simplex([0.7, 0.4])

    def test_rejects_negative(self):
        with pytest.raises(ValueError, match="negative"):
            validate_simplex([-0.1, 1.1])

    def test_renormalizes(self):
        p = validate_simplex([0.3 + 2e-13, 0.7])
        assert p.sum() == pytest.approx(1.0, abs=1e-15)

    def test_clips_tiny_negative(self):
        p = validate_simplex([-1e-13, 1.0])
        assert p[0] == 0.0 and p[1] == 1.0

    @given(st.lists(st.floats(min_value=0.01, max_value=10.0), min_size=2, max_size=6))
    def test_normalized_vectors_accepted(self, weights):
        w = np.asarray(weights)
        p = validate_simplex(w / w.sum())
        assert p.min() >= 0.0
        assert p.sum() == pytest.approx(1.0, abs=1e-12)


class TestRngStream:
    def test_same_stream_same_draws(self):
        a = RngStream(123, 7).generator().random(100)
        b = RngStream(123, 7).generator().random(100)
        np.testing.assert_array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = RngStream(123, 7).generator().random(100)
        b = RngStream(123, 8).generator().random(100)
        c = RngStream(124, 7).generator().random(100)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_negative_seed_ok(self):
        RngStream(-5, 0).generator().random()


def test_uniform_point():
    np.testing.assert_allclose(uniform_point(4), [0.25] * 4)


def test_one_hot_bounds():
    np.testing.assert_array_equal(one_hot(1, 3), [0.0, 1.0, 0.0])
    with pytest.raises(ValueError):
        one_hot(3, 3)
