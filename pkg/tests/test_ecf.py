"""Tests for increments, the cross-over function and the split point."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ecf_jumps.ecf import (
    Boundary,
    EcfCurve,
    IncrementSample,
    cluster_sizes,
    compute_ecf,
    make_increments,
    split_point,
    truncation_level,
)
from ecf_jumps.errors import (
    DegenerateSplitError,
    NonFiniteInputError,
    TooFewObservationsError,
)
from ecf_jumps.summation import COMPENSATED_THRESHOLD, prefix_sums


def naive_ecf(w: np.ndarray) -> tuple[np.ndarray, float]:
    """Direct O(n^2) evaluation of the defining sums."""
    v = np.sort(w)
    n = len(v)
    grid = np.array(
        [
            sum(v[:k]) / k - v[k - 1] + sum(v[k:]) / (n - k) - v[k]
            for k in range(1, n)
        ]
    )
    return grid, sum(v) / n - v[n - 1]


def naive_crossing(values: np.ndarray) -> int:
    ks = [k for k in range(1, len(values)) if values[k - 1] * values[k] <= 0]
    return max(ks)


SAMPLE_1248 = IncrementSample.from_increments([8.0, 1.0, 4.0, 2.0])


class TestMakeIncrements:
    def test_constant_path(self) -> None:
        sample = make_increments([1, 1, 1, 1])
        assert sample.n == 3
        assert np.array_equal(sample.values, [0.0, 0.0, 0.0])

    def test_differences_are_sorted(self) -> None:
        sample = make_increments([0, 1, 3, 2])
        assert list(sample.values) == [-1.0, 1.0, 2.0]

    def test_prefix_sums(self) -> None:
        assert list(SAMPLE_1248.prefix_sum) == [0.0, 1.0, 3.0, 7.0, 15.0]
        assert list(SAMPLE_1248.prefix_sum_sq) == [0.0, 1.0, 5.0, 21.0, 85.0]

    def test_too_few_observations(self) -> None:
        with pytest.raises(TooFewObservationsError):
            make_increments([1.0, 2.0])

    def test_non_finite(self) -> None:
        with pytest.raises(NonFiniteInputError):
            make_increments([1.0, np.nan, 2.0, 3.0])

    def test_arrays_are_read_only(self) -> None:
        with pytest.raises(ValueError):
            SAMPLE_1248.values[0] = 0.0


class TestPrefixSums:
    def test_short_input_uses_cumsum(self) -> None:
        out = prefix_sums(np.array([1.0, 2.0, 3.0]))
        assert list(out) == [0.0, 1.0, 3.0, 6.0]

    def test_compensated_kernel_beats_naive_sum(self) -> None:
        # 1 followed by many values that vanish in plain float addition.
        x = np.full(COMPENSATED_THRESHOLD, 1e-16)
        x[0] = 1.0
        out = prefix_sums(x)
        assert out[-1] == pytest.approx(1.0 + (COMPENSATED_THRESHOLD - 1) * 1e-16, rel=1e-15)
        assert out[-1] > 1.0


class TestComputeEcf:
    def test_hand_example(self) -> None:
        curve = compute_ecf(SAMPLE_1248)
        np.testing.assert_allclose(curve.grid, [8 / 3, 3 / 2, -5 / 3], rtol=1e-15)
        assert curve.terminal == pytest.approx(-17 / 4)
        assert curve.n == 4

    def test_two_point_symmetric(self) -> None:
        curve = compute_ecf(IncrementSample.from_increments([-1.0, 1.0]))
        assert list(curve.grid) == [0.0]

    def test_all_equal_sample(self) -> None:
        curve = compute_ecf(IncrementSample.from_increments([0.1] * 7))
        assert np.all(curve.grid == 0.0)
        assert curve.terminal == 0.0

    def test_values_and_points(self) -> None:
        curve = compute_ecf(SAMPLE_1248)
        assert len(curve.values) == 4
        points = list(curve.points())
        assert [p for p, _ in points] == [0.0, 0.25, 0.5, 0.75]
        assert points[-1][1] == curve.terminal

    @settings(max_examples=500, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 200))
    def test_matches_naive_oracle(self, seed: int, n: int) -> None:
        w = np.random.default_rng(seed).standard_normal(n)
        curve = compute_ecf(IncrementSample.from_increments(w))
        grid, terminal = naive_ecf(w)
        scale = float(np.max(np.abs(w)))
        np.testing.assert_allclose(curve.grid, grid, rtol=1e-12, atol=1e-12 * scale)
        assert curve.terminal == pytest.approx(terminal, rel=1e-12, abs=1e-12 * scale)
        assert split_point(curve).crossing_index == naive_crossing(np.append(grid, terminal))

    @settings(max_examples=200, deadline=None)
    @given(
        seed=st.integers(0, 2**32 - 1),
        n=st.integers(3, 200),
        alpha=st.floats(0.1, 10.0),
        beta=st.floats(-100.0, 100.0),
    )
    def test_affine_invariance(self, seed: int, n: int, alpha: float, beta: float) -> None:
        w = np.random.default_rng(seed).standard_normal(n)
        base = compute_ecf(IncrementSample.from_increments(w))
        moved = compute_ecf(IncrementSample.from_increments(alpha * w + beta))
        assert split_point(moved).crossing_index == split_point(base).crossing_index
        # Translation error is relative to the size of the shifted values.
        scale = float(np.max(np.abs(alpha * w + beta)))
        np.testing.assert_allclose(moved.grid, alpha * base.grid, rtol=1e-10, atol=1e-10 * scale)

    @settings(max_examples=100, deadline=None)
    @given(values=st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=100))
    def test_endpoint_signs(self, values: list[float]) -> None:
        curve = compute_ecf(IncrementSample.from_increments(values))
        assert curve.grid[0] >= 0.0
        assert curve.grid[-1] <= 0.0
        assert curve.terminal <= 0.0

    def test_permutation_invariance(self) -> None:
        rng = np.random.default_rng(11)
        w = rng.standard_normal(300)
        a = compute_ecf(IncrementSample.from_increments(w))
        b = compute_ecf(IncrementSample.from_increments(rng.permutation(w)))
        assert np.array_equal(a.grid, b.grid)
        assert a.terminal == b.terminal

    def test_tail_is_negative_for_normal_samples(self) -> None:
        negative = 0
        for seed in range(100):
            w = np.random.default_rng(seed).standard_normal(10_000)
            grid = compute_ecf(IncrementSample.from_increments(w)).grid
            negative += bool(np.max(grid[9500:]) < 0)
        assert negative >= 99


class TestSplitPoint:
    def test_hand_example(self) -> None:
        sp = split_point(compute_ecf(SAMPLE_1248))
        assert sp.p_n == 0.5
        assert sp.crossing_index == 2
        assert sp.pivot_index == 2
        assert sp.boundary is Boundary.INTERIOR
        assert not sp.zero_curve

    def test_all_negative_grid(self) -> None:
        curve = EcfCurve(grid=np.array([-1.0, -1.0, -1.0]), terminal=-1.0, n=4)
        sp = split_point(curve)
        assert sp.p_n == 0.0
        assert sp.boundary is Boundary.ALL_NEGATIVE
        assert sp.crossing_index is None
        assert sp.pivot_index is None

    def test_all_positive_grid(self) -> None:
        curve = EcfCurve(grid=np.array([2.0, 1.0]), terminal=-1.0, n=3)
        sp = split_point(curve)
        assert sp.p_n == 1.0
        assert sp.boundary is Boundary.ALL_POSITIVE

    def test_zero_curve_is_flagged(self) -> None:
        sp = split_point(compute_ecf(make_increments([5.0] * 5)))
        assert sp.zero_curve
        assert sp.crossing_index == 3
        assert sp.p_n == pytest.approx(3 / 4)

    def test_zero_product_counts_as_crossing(self) -> None:
        curve = EcfCurve(grid=np.array([1.0, 0.0, -1.0]), terminal=-2.0, n=4)
        assert split_point(curve).crossing_index == 2

    def test_cluster_capture(self) -> None:
        # Tight diffusion cluster of 900, jump cluster of 100 one hundred units away.
        captured = 0
        for seed in range(200):
            rng = np.random.default_rng(seed)
            w = np.concatenate(
                [0.01 * rng.standard_normal(900), 100.0 + rng.standard_normal(100)]
            )
            sp = split_point(compute_ecf(IncrementSample.from_increments(w)))
            captured += sp.crossing_index == 900
        assert captured >= 198

    def test_consistency_for_normal_samples(self) -> None:
        deviations = []
        for seed in range(50):
            w = np.random.default_rng(seed).standard_normal(10_000)
            deviations.append(abs(split_point(compute_ecf(IncrementSample.from_increments(w))).p_n - 0.5))
        assert np.median(deviations) < 0.02

    @pytest.mark.slow
    def test_consistency_over_500_seeds(self) -> None:
        deviations = []
        for seed in range(500):
            w = np.random.default_rng(seed).standard_normal(10_000)
            deviations.append(abs(split_point(compute_ecf(IncrementSample.from_increments(w))).p_n - 0.5))
        assert np.median(deviations) < 0.02

    @pytest.mark.slow
    def test_cluster_capture_over_1000_seeds(self) -> None:
        # Jump cluster 50 units above the diffusion cluster, 50 of its own spreads away.
        captured = 0
        for seed in range(1000):
            rng = np.random.default_rng(seed)
            w = np.concatenate([0.01 * rng.standard_normal(900), 50.0 + rng.standard_normal(100)])
            sp = split_point(compute_ecf(IncrementSample.from_increments(w)))
            captured += sp.crossing_index == 900
        assert captured >= 990


class TestClusterSummaries:
    def test_truncation_level_is_pivot_value(self) -> None:
        sp = split_point(compute_ecf(SAMPLE_1248))
        assert truncation_level(SAMPLE_1248, sp) == 2.0

    def test_cluster_sizes(self) -> None:
        sp = split_point(compute_ecf(SAMPLE_1248))
        assert cluster_sizes(sp) == (2, 2)

    def test_boundary_split_has_no_clusters(self) -> None:
        sp = split_point(EcfCurve(grid=np.array([-1.0]), terminal=-1.0, n=2))
        with pytest.raises(DegenerateSplitError):
            cluster_sizes(sp)
