from itertools import product

import numpy as np
import pytest

from fate.exceptions import (
    BadConfig,
    EmptyGroup,
    LabelOutOfRange,
    ShapeMismatch,
    SingleClass,
)
from fate.metrics import accuracy, dpv, eod, eood

# one row per (y, s) cell so every slice keeps both groups populated
Y4 = np.array([0, 1, 0, 1])
S4 = np.array([0, 0, 1, 1])


def rate(pred, rows):
    return np.mean(pred[rows] == 1)


def oracle_dpv(pred, s):
    return abs(rate(pred, s == 0) - rate(pred, s == 1))


def oracle_eod(pred, y, s, positive=1):
    pos = y == positive
    return abs(rate(pred, pos & (s == 0)) - rate(pred, pos & (s == 1)))


def oracle_eood(pred, y, s):
    gaps = []
    for cls in np.unique(y):
        rows = y == cls
        gaps.append(abs(rate(pred, rows & (s == 0)) - rate(pred, rows & (s == 1))))
    return float(np.mean(gaps))


class TestCountingOracle:
    def test_all_binary_patterns_exact(self):
        # quarters and halves are exact binary floats, so require equality
        for bits in product((0, 1), repeat=4):
            pred = np.array(bits)
            assert dpv(pred, S4) == oracle_dpv(pred, S4)
            assert eod(pred, Y4, S4) == oracle_eod(pred, Y4, S4)
            assert eood(pred, Y4, S4) == oracle_eood(pred, Y4, S4)
            assert accuracy(pred, Y4) == np.mean(pred == Y4)

    def test_random_instances_match_oracle(self):
        for seed in range(30):
            rng = np.random.default_rng(seed)
            n = 40
            y = np.concatenate([Y4, rng.integers(0, 2, size=n - 4)])
            s = np.concatenate([S4, rng.integers(0, 2, size=n - 4)])
            pred = rng.integers(0, 2, size=n)
            assert dpv(pred, s) == pytest.approx(oracle_dpv(pred, s), abs=1e-12)
            assert eod(pred, y, s) == pytest.approx(oracle_eod(pred, y, s), abs=1e-12)
            assert eood(pred, y, s) == pytest.approx(oracle_eood(pred, y, s), abs=1e-12)
            for v in (dpv(pred, s), eod(pred, y, s), eood(pred, y, s)):
                assert 0.0 <= v <= 1.0


class TestAggregation:
    def test_three_groups_max_and_mean(self):
        pred = np.array([1, 1, 0, 0, 0, 1])
        s = np.array([0, 0, 1, 1, 2, 2])
        # per-group positive rates 1.0, 0.0, 0.5 -> pairwise gaps 1, .5, .5
        assert dpv(pred, s) == 1.0
        assert dpv(pred, s, aggregate="mean") == pytest.approx(2.0 / 3.0)

    def test_bad_aggregate(self):
        with pytest.raises(BadConfig):
            dpv(np.array([0, 1]), np.array([0, 1]), aggregate="median")


class TestPositiveClass:
    def test_eod_positive_class_knob(self):
        y = np.array([0, 0, 1, 1])
        s = np.array([0, 1, 0, 1])
        pred = np.array([1, 0, 1, 1])
        assert eod(pred, y, s) == 0.0  # within y=1 both groups predict 1
        assert eod(pred, y, s, positive_class=0) == 1.0

    def test_eood_averages_both_classes(self):
        y = np.array([0, 0, 1, 1])
        s = np.array([0, 1, 0, 1])
        pred = np.array([1, 0, 1, 1])
        assert eood(pred, y, s) == pytest.approx(0.5)


class TestErrors:
    def test_single_sensitive_group(self):
        with pytest.raises(SingleClass):
            dpv(np.array([0, 1]), np.array([0, 0]))

    def test_empty_group_within_slice(self):
        y = np.array([1, 1, 0, 0])
        s = np.array([0, 0, 1, 1])
        with pytest.raises(EmptyGroup):
            eod(np.array([1, 0, 1, 0]), y, s)

    def test_missing_positive_class(self):
        with pytest.raises(EmptyGroup):
            eod(np.zeros(4, dtype=int), np.zeros(4, dtype=int), S4)

    def test_nonbinary_predictions(self):
        with pytest.raises(LabelOutOfRange):
            dpv(np.array([0, 2, 1, 0]), S4)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            dpv(np.array([0, 1, 0]), S4)
        with pytest.raises(ShapeMismatch):
            eod(np.array([0, 1]), Y4, S4)
        with pytest.raises(ShapeMismatch):
            accuracy(np.array([0, 1]), Y4)

    def test_empty_input(self):
        empty = np.array([], dtype=int)
        with pytest.raises(EmptyGroup):
            accuracy(empty, empty)
        with pytest.raises(EmptyGroup):
            dpv(empty, empty)
        with pytest.raises(EmptyGroup):
            eood(empty, empty, empty)


def test_accuracy_basics():
    assert accuracy(np.array([0, 1, 1]), np.array([0, 1, 0])) == pytest.approx(2 / 3)
    assert accuracy(Y4, Y4) == 1.0
