import numpy as np
import pytest

from fate.dependence import (
    NOTIONS,
    check_notion,
    dep_empirical,
    dep_of_representation,
    dep_terms_for_notion,
    notion_slices,
    slice_by_label,
    unconditional_slice,
)
from fate.exceptions import BadConfig, EmptyClass, LabelOutOfRange, ShapeMismatch
from fate.kernels import GramFactor, onehot_factor


def dense_dep(theta, l_x, l_a):
    """Independent dense evaluation of (1/n^2) ||Theta K H L_A||_F^2."""
    n = l_x.shape[0]
    k = l_x @ l_x.T
    h = np.eye(n) - np.ones((n, n)) / n
    m = theta @ k @ h @ l_a
    return np.linalg.norm(m) ** 2 / n**2


class TestDepEmpirical:
    def test_matches_dense_oracle(self, rng):
        for _ in range(20):
            n = int(rng.integers(4, 30))
            m = int(rng.integers(2, 12))
            r = int(rng.integers(1, 4))
            l_x = rng.normal(size=(n, m))
            a = rng.integers(0, 3, size=n)
            l_a = onehot_factor(a, num_classes=3)
            theta = rng.normal(size=(r, n))
            got = dep_empirical(theta, GramFactor(l_x, "linear"), GramFactor(l_a, "delta"))
            want = dense_dep(theta, l_x, l_a)
            assert got == pytest.approx(want, rel=1e-10)

    def test_frozen_tiny_case(self):
        # 4 rows, 2 basis columns, 1 output dim.  Hand evaluation:
        # Theta @ K = [3, 0.75, 3.75, 5.25]; the centered one-hot columns are
        # +-0.5, giving cross terms +-0.375, so dep = 2 * 0.375^2 / 16 = 9/512.
        l_x = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, -1.0]])
        l_a = onehot_factor(np.array([0, 1, 0, 1]))
        theta = np.array([[0.5, -1.0, 2.0, 0.25]])
        assert dense_dep(theta, l_x, l_a) == pytest.approx(9.0 / 512.0, rel=1e-12)
        got = dep_empirical(theta, GramFactor(l_x, "linear"), GramFactor(l_a, "delta"))
        assert got == pytest.approx(9.0 / 512.0, rel=1e-10)

    def test_independent_labels_give_small_value(self, rng):
        # z constant => centered cross term vanishes
        n = 50
        l_x = np.ones((n, 1))
        theta = np.ones((1, n))
        l_a = onehot_factor(rng.integers(0, 2, size=n))
        # Theta K is constant across rows; H kills it
        got = dep_empirical(theta, GramFactor(l_x, "linear"), GramFactor(l_a, "delta"))
        assert got == pytest.approx(0.0, abs=1e-18)

    def test_shape_errors(self, rng):
        l_x = GramFactor(rng.normal(size=(5, 2)), "linear")
        l_a = GramFactor(onehot_factor([0, 1, 0, 1, 1]), "delta")
        with pytest.raises(ShapeMismatch):
            dep_empirical(rng.normal(size=(1, 4)), l_x, l_a)
        with pytest.raises(ShapeMismatch):
            dep_empirical(rng.normal(size=(1, 5)), l_x,
                          GramFactor(onehot_factor([0, 1]), "delta"))


class TestSlices:
    def test_unconditional(self):
        cond = unconditional_slice(4)
        assert cond.label is None and cond.n == 4
        assert np.array_equal(cond.indices, np.arange(4))

    def test_slice_by_label(self):
        y = np.array([0, 1, 1, 0, 1])
        cond = slice_by_label(y, 1)
        assert cond.label == 1
        assert np.array_equal(cond.indices, [1, 2, 4])

    def test_slice_errors(self):
        y = np.array([0, 1, 1])
        with pytest.raises(LabelOutOfRange):
            slice_by_label(y, 2)
        with pytest.raises(EmptyClass):
            slice_by_label(y, 0, num_classes=3) if False else slice_by_label(
                np.array([1, 1, 1]), 0, num_classes=2)

    def test_notion_slices_dp(self):
        y = np.array([0, 1, 0, 1])
        slices = notion_slices(y, "dp")
        assert len(slices) == 1 and slices[0].label is None and slices[0].n == 4

    def test_notion_slices_eo(self):
        y = np.array([0, 1, 0, 1])
        slices = notion_slices(y, "eo")
        assert len(slices) == 1 and slices[0].label == 1
        slices = notion_slices(y, "eo", positive_class=0)
        assert slices[0].label == 0

    def test_notion_slices_eoo(self):
        y = np.array([0, 1, 2, 0, 1, 2])
        slices = notion_slices(y, "eoo")
        assert [c.label for c in slices] == [0, 1, 2]
        assert all(c.n == 2 for c in slices)

    def test_check_notion(self):
        for n in NOTIONS:
            assert check_notion(n) == n
        with pytest.raises(BadConfig):
            check_notion("equal-odds")


class TestDepOfRepresentation:
    def test_matches_dense_on_slice(self, rng):
        n = 24
        z = rng.normal(size=(n, 2))
        y = rng.integers(0, 2, size=n)
        s = rng.integers(0, 2, size=n)
        cond = slice_by_label(y, 1)
        got = dep_of_representation(z, s, cond, num_classes=2)
        # oracle: restrict first, then dense formula with identity basis
        zs, ss = z[cond.indices], s[cond.indices]
        m = cond.n
        h = np.eye(m) - np.ones((m, m)) / m
        want = np.linalg.norm(zs.T @ h @ onehot_factor(ss, 2)) ** 2 / m**2
        assert got == pytest.approx(want, rel=1e-10)

    def test_agrees_with_dep_empirical_via_z_form(self, rng):
        # Z = L @ Theta.T makes the two evaluation routes identical
        n, m, r = 18, 5, 2
        l_x = rng.normal(size=(n, m))
        theta = rng.normal(size=(r, n))
        a = rng.integers(0, 3, size=n)
        z = l_x @ (theta @ l_x).T
        via_factor = dep_empirical(theta, GramFactor(l_x, "linear"),
                                   GramFactor(onehot_factor(a, 3), "delta"))
        via_z = dep_of_representation(z, a, num_classes=3)
        assert via_z == pytest.approx(via_factor, rel=1e-10)

    def test_nonnegative(self, rng):
        for _ in range(20):
            z = rng.normal(size=(10, 3))
            a = rng.integers(0, 2, size=10)
            assert dep_of_representation(z, a) >= 0.0

    def test_empty_slice_error(self, rng):
        z = rng.normal(size=(4, 1))
        with pytest.raises(EmptyClass):
            dep_of_representation(z, np.array([0, 0, 1, 1]),
                                  type(unconditional_slice(0))(np.array([], dtype=int), 2))


class TestDepTermsForNotion:
    def test_theta_and_z_routes_agree(self, rng):
        n, m = 30, 6
        l_x = rng.normal(size=(n, m))
        theta = rng.normal(size=(2, n))
        y = rng.integers(0, 2, size=n)
        s = rng.integers(0, 2, size=n)
        z = l_x @ (theta @ l_x).T
        factor = GramFactor(l_x, "linear")
        for notion in NOTIONS:
            via_theta = dep_terms_for_notion(y, s, notion, theta=theta, x_factor=factor)
            via_z = dep_terms_for_notion(y, s, notion, z=z)
            assert len(via_theta) == len(via_z)
            for a, b in zip(via_theta, via_z):
                assert a.value == pytest.approx(b.value, rel=1e-9)
                assert a.cond.label == b.cond.label

    def test_eoo_sums_over_observed_classes(self, rng):
        y = np.array([0, 0, 1, 1, 2, 2])
        s = np.array([0, 1, 0, 1, 0, 1])
        z = rng.normal(size=(6, 1))
        terms = dep_terms_for_notion(y, s, "eoo", z=z)
        assert [t.cond.label for t in terms] == [0, 1, 2]

    def test_requires_exactly_one_input(self, rng):
        y = s = np.array([0, 1, 0, 1])
        z = rng.normal(size=(4, 1))
        with pytest.raises(BadConfig):
            dep_terms_for_notion(y, s, "dp")
        with pytest.raises(BadConfig):
            dep_terms_for_notion(y, s, "dp", z=z, theta=np.ones((1, 4)))
        with pytest.raises(BadConfig):
            dep_terms_for_notion(y, s, "dp", theta=np.ones((1, 4)))  # no factor
