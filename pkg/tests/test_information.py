import math

import numpy as np
import pytest

from enselect.copula import EquicorrelatedSpec, sample_equicorrelated
from enselect.data import Dataset, WeightedDataset
from enselect.information import (
    DiscreteSequence,
    exact_entropy,
    exact_gain_breakdown,
    exact_mi,
    gain_breakdown,
    grouped_cmi,
    grouped_mi,
    smoothed_conditional_mi,
    smoothed_mi,
)


def seq(values, k=2):
    return DiscreteSequence(np.asarray(values, dtype=np.int64), k)


def binary_entropy(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def random_joint_table(rng, shape):
    t = rng.random(shape)
    return t / t.sum()


class TestSmoothedMi:
    def test_uniform_joint_is_zero(self):
        a = seq([0, 0, 1, 1])
        b = seq([0, 1, 0, 1])
        assert smoothed_mi(a, b, alpha=1.0) == 0.0

    def test_identical_pair_hand_value(self):
        a = seq([0, 0, 1, 1])
        got = smoothed_mi(a, a, alpha=1.0)
        # Marginals smooth to 1/2; joint cells to 3/8, 3/8, 1/8, 1/8.
        h_joint = -2 * (3 / 8) * math.log2(3 / 8) - 2 * (1 / 8) * math.log2(1 / 8)
        assert got == pytest.approx(1.0 + 1.0 - h_joint, abs=1e-12)
        assert got == pytest.approx(0.1887, abs=1e-4)

    def test_independent_sequences_near_zero(self):
        rng = np.random.default_rng(2)
        a = seq(rng.integers(0, 2, size=100_000))
        b = seq(rng.integers(0, 2, size=100_000))
        assert smoothed_mi(a, b) <= 0.001

    def test_symmetry_and_nonnegativity(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(2, 40))
            a = seq(rng.integers(0, 3, size=n), 3)
            b = seq(rng.integers(0, 2, size=n), 2)
            ab = smoothed_mi(a, b)
            ba = smoothed_mi(b, a)
            assert ab >= 0.0
            assert ab == pytest.approx(ba, abs=1e-12)

    def test_weights_reduce_to_repetition(self):
        # Integer weights must agree with literally repeating rows.
        a = seq([0, 1, 1])
        b = seq([0, 0, 1])
        w = np.array([2.0, 1.0, 3.0])
        a_rep = seq([0, 0, 1, 1, 1, 1])
        b_rep = seq([0, 0, 0, 1, 1, 1])
        assert smoothed_mi(a, b, weights=w) == pytest.approx(
            smoothed_mi(a_rep, b_rep), abs=1e-12
        )

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            smoothed_mi(seq([0, 1]), seq([0, 1, 1]))

    def test_alphabet_violation_rejected(self):
        with pytest.raises(ValueError):
            smoothed_mi(seq([0, 2], k=2), seq([0, 1]))


class TestSmoothedConditionalMi:
    def test_constant_condition_equals_mi(self):
        rng = np.random.default_rng(5)
        y = seq(rng.integers(0, 2, size=200))
        x = seq(rng.integers(0, 2, size=200))
        z = seq(np.zeros(200, dtype=np.int64), 1)
        assert smoothed_conditional_mi(y, x, z) == pytest.approx(
            smoothed_mi(y, x), abs=1e-12
        )

    def test_conditioning_on_self_kills_information(self):
        rng = np.random.default_rng(7)
        x_vals = rng.integers(0, 2, size=10_000)
        y = seq(rng.integers(0, 2, size=10_000))
        x = seq(x_vals)
        assert smoothed_conditional_mi(y, x, x) <= 0.01

    def test_exact_frequency_injection_matches_table(self):
        # Unsmoothed weighted estimate on enumerated frequencies == exact CMI.
        rng = np.random.default_rng(11)
        table = random_joint_table(rng, (2, 2, 3))
        codes = [(y, x, z) for y in range(2) for x in range(2) for z in range(3)]
        w = np.array([table[c] for c in codes])
        y = seq([c[0] for c in codes])
        x = seq([c[1] for c in codes])
        z = seq([c[2] for c in codes], 3)
        got = smoothed_conditional_mi(y, x, z, alpha=0.0, weights=w)
        expected = grouped_cmi(table, [0], [1], [2])
        assert got == pytest.approx(expected, abs=1e-9)


class TestExactMi:
    def test_product_distribution_zero(self):
        pa = np.array([0.3, 0.7])
        pb = np.array([0.6, 0.4])
        assert exact_mi(np.outer(pa, pb)) == pytest.approx(0.0, abs=1e-15)

    def test_binary_symmetric_channel_value(self):
        eps = 0.1
        joint = np.array([[0.5 * (1 - eps), 0.5 * eps], [0.5 * eps, 0.5 * (1 - eps)]])
        assert exact_mi(joint) == pytest.approx(1.0 - binary_entropy(0.1), abs=1e-12)
        assert exact_mi(joint) == pytest.approx(0.53101, abs=1e-5)

    def test_perfect_dependence_one_bit(self):
        joint = np.array([[0.5, 0.0], [0.0, 0.5]])
        assert exact_mi(joint) == pytest.approx(1.0, abs=1e-15)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            exact_mi(np.array([[0.5, 0.5], [0.5, 0.5]]))

    def test_entropy_helper(self):
        assert exact_entropy(np.array([0.5, 0.5])) == pytest.approx(1.0)
        assert exact_entropy(np.array([1.0, 0.0])) == pytest.approx(0.0)


class TestGroupedMeasures:
    def test_grouped_mi_matches_manual_reshape(self):
        rng = np.random.default_rng(13)
        table = random_joint_table(rng, (2, 2, 2))
        # I(X0; (X1, X2)) via explicit 2 x 4 reshape.
        manual = exact_mi(table.reshape(2, 4))
        assert grouped_mi(table, [0], [1, 2]) == pytest.approx(manual, abs=1e-12)

    def test_chain_rule(self):
        # I(A; B, C) = I(A; C) + I(A; B | C)
        rng = np.random.default_rng(17)
        table = random_joint_table(rng, (2, 3, 2))
        lhs = grouped_mi(table, [0], [1, 2])
        rhs = grouped_mi(table, [0], [2]) + grouped_cmi(table, [0], [1], [2])
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_empty_groups(self):
        rng = np.random.default_rng(19)
        table = random_joint_table(rng, (2, 2))
        assert grouped_mi(table, [0], []) == 0.0
        assert grouped_cmi(table, [0], [1], []) == pytest.approx(
            grouped_mi(table, [0], [1]), abs=1e-15
        )


class TestGainBreakdown:
    def make_dataset(self, n=400, m=3, seed=0):
        rng = np.random.default_rng(seed)
        labels = rng.choice([-1, 1], size=n)
        flips = rng.random((n, m)) < 0.25
        predictions = labels[:, None] * (1 - 2 * flips.astype(np.int8))
        return Dataset(labels, predictions, tuple(f"m{j}" for j in range(m)))

    def test_empty_subset_reduces_to_relevance(self):
        d = self.make_dataset()
        got = gain_breakdown(d, 0, [])
        assert got.redundancy == 0.0
        assert got.error_correlation == 0.0
        assert got.correction == 0.0
        assert got.total_cmi == pytest.approx(got.relevance, abs=1e-12)

    def test_rejects_member_candidate(self):
        d = self.make_dataset()
        with pytest.raises(ValueError):
            gain_breakdown(d, 1, [1, 2])

    def test_label_invariant_errors_have_tiny_correction(self):
        spec = EquicorrelatedSpec(m=4, rho=0.4, alpha=0.75)
        d = sample_equicorrelated(spec, 100_000, seed=23)
        for j, s in [(0, [1]), (2, [0, 1]), (3, [0, 1, 2])]:
            got = gain_breakdown(d, j, s)
            assert abs(got.correction) <= 0.01

    def test_estimated_decomposition_tracks_direct_cmi(self):
        d = self.make_dataset(n=100_000, m=4, seed=29)
        got = gain_breakdown(d, 3, [0, 1])
        recomposed = got.relevance - got.redundancy + got.error_correlation + got.correction
        assert recomposed == pytest.approx(got.total_cmi, abs=0.02)

    def test_estimated_correction_respects_bounds(self):
        # -I(E_j; Y) <= correction <= H(Y) - I(E_j; Y), on the estimated side.
        from enselect.data import error_matrix as em
        from enselect.information import labels_to_bits

        rng = np.random.default_rng(43)
        for _ in range(100):
            n = int(rng.integers(8, 150))
            m = int(rng.integers(2, 5))
            d = Dataset(
                rng.choice([-1, 1], size=n),
                rng.choice([-1, 1], size=(n, m)),
                tuple(f"m{j}" for j in range(m)),
            )
            j = int(rng.integers(0, m))
            others = [i for i in range(m) if i != j]
            s = list(rng.choice(others, size=int(rng.integers(1, m)), replace=False))
            got = gain_breakdown(d, j, s)
            e_j = seq(em(d).astype(np.int64)[:, j])
            relevance_of_error = smoothed_mi(e_j, labels_to_bits(d))
            assert got.correction >= -relevance_of_error - 1e-12
            assert got.correction <= 1.0 - relevance_of_error + 1e-12

    def test_weighted_dataset_flows_through(self):
        labels = np.array([1, 1, -1, -1])
        preds = np.array([[1, 1], [1, -1], [-1, -1], [1, -1]], dtype=np.int8)
        w = np.array([0.4, 0.1, 0.3, 0.2])
        wd = WeightedDataset(labels, preds, ("a", "b"), w)
        got = gain_breakdown(wd, 1, [0], alpha=0.0)
        # Oracle: assemble the exact joint table and decompose it there.
        table = np.zeros((2, 2, 2))
        for lab, row, wt in zip(labels, preds, w):
            table[(lab + 1) // 2, (row[0] + 1) // 2, (row[1] + 1) // 2] += wt
        expected = exact_gain_breakdown(table, 1, [0])
        assert got.total_cmi == pytest.approx(expected.total_cmi, abs=1e-9)
        assert got.relevance == pytest.approx(expected.relevance, abs=1e-9)
        assert got.redundancy == pytest.approx(expected.redundancy, abs=1e-9)


class TestExactDecompositionIdentity:
    def test_identity_on_random_joints(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            m = int(rng.integers(2, 5))
            table = random_joint_table(rng, (2,) * (m + 1))
            j = int(rng.integers(0, m))
            others = [i for i in range(m) if i != j]
            size = int(rng.integers(0, len(others) + 1))
            s = list(rng.choice(others, size=size, replace=False))
            got = exact_gain_breakdown(table, j, s)
            recomposed = (
                got.relevance - got.redundancy + got.error_correlation + got.correction
            )
            assert recomposed == pytest.approx(got.total_cmi, abs=1e-9)

    def test_correction_bounds(self):
        # -I(E_j; Y) <= correction <= H(Y) - I(E_j; Y) on every instance.
        rng = np.random.default_rng(37)
        for _ in range(100):
            m = int(rng.integers(2, 5))
            table = random_joint_table(rng, (2,) * (m + 1))
            j = int(rng.integers(0, m))
            others = [i for i in range(m) if i != j]
            s = list(rng.choice(others, size=min(2, len(others)), replace=False))
            got = exact_gain_breakdown(table, j, s)
            h_y = exact_entropy(table.reshape(2, -1).sum(axis=1))
            relevance_of_error = grouped_mi(_error_table(table), [j + 1], [0])
            assert got.correction >= -relevance_of_error - 1e-9
            assert got.correction <= h_y - relevance_of_error + 1e-9

    def test_label_invariant_builder_kills_correction(self):
        rng = np.random.default_rng(41)
        for _ in range(50):
            m = int(rng.integers(2, 5))
            # Errors drawn independent of the label by construction.
            p_err = random_joint_table(rng, (2,) * m)
            table = np.zeros((2,) * (m + 1))
            table[0] = 0.5 * p_err
            table[1] = 0.5 * np.flip(p_err, axis=tuple(range(m)))
            j = int(rng.integers(0, m))
            others = [i for i in range(m) if i != j]
            s = list(rng.choice(others, size=min(2, len(others)), replace=False))
            got = exact_gain_breakdown(table, j, s)
            assert abs(got.correction) <= 1e-9


def _error_table(joint_yx):
    from enselect.information import _error_coordinates

    return _error_coordinates(joint_yx)
