import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from monah.dtw import EmptySeries, dtw_distance


def brute_force_dtw(a, b):
    """Enumerate every monotone warping path (no memoization)."""
    n, m = len(a), len(b)

    def rec(i, j):
        cost = abs(a[i] - b[j])
        if i == n - 1 and j == m - 1:
            return cost
        best = math.inf
        if i + 1 < n:
            best = min(best, rec(i + 1, j))
        if j + 1 < m:
            best = min(best, rec(i, j + 1))
        if i + 1 < n and j + 1 < m:
            best = min(best, rec(i + 1, j + 1))
        return cost + best

    return rec(0, 0)


def test_identical_series_zero():
    assert dtw_distance([1, 2, 3], [1, 2, 3]) == 0.0


def test_small_hand_case():
    # best path aligns the single mismatching element diagonally
    assert dtw_distance([1, 2], [2, 2]) == 1.0
    assert brute_force_dtw([1, 2], [2, 2]) == 1.0


def test_empty_series_raises():
    with pytest.raises(EmptySeries):
        dtw_distance([], [1.0])
    with pytest.raises(EmptySeries):
        dtw_distance([1.0], [])


def test_matches_brute_force_small_lengths():
    rng = random.Random(7)
    for _ in range(120):
        a = [rng.uniform(-3, 3) for _ in range(rng.randint(1, 6))]
        b = [rng.uniform(-3, 3) for _ in range(rng.randint(1, 6))]
        assert dtw_distance(a, b) == pytest.approx(brute_force_dtw(a, b), abs=1e-12)


series = st.lists(
    st.floats(min_value=-50, max_value=50, allow_nan=False), min_size=1, max_size=7
)


@settings(max_examples=60, deadline=None)
@given(series, series)
def test_symmetry(a, b):
    assert dtw_distance(a, b) == pytest.approx(dtw_distance(b, a), rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(series)
def test_self_distance_zero(a):
    assert dtw_distance(a, a) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(
    st.floats(min_value=-50, max_value=50, allow_nan=False),
    st.floats(min_value=-50, max_value=50, allow_nan=False),
), min_size=1, max_size=7))
def test_diagonal_path_bound_for_equal_lengths(pairs):
    a = [p[0] for p in pairs]
    b = [p[1] for p in pairs]
    bound = sum(abs(x - y) for x, y in pairs)
    assert dtw_distance(a, b) <= bound + 1e-9
