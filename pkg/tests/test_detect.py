import numpy as np
import pytest

from hsdemix.detect import (
    ScoreVector,
    best_auc_over_lambda,
    column_norm_scores,
    matched_filter,
    matched_filter_dagger,
    roc,
)
from hsdemix.dictionary import Dictionary
from hsdemix.errors import DegenerateMaskError
from hsdemix.hsio import GroundTruthMask
from hsdemix.solver import ApgConfig, lambda_grid
from hsdemix.synth import SynthSpec, generate

from oracles import auc_pairwise


def mask_of(labels):
    return GroundTruthMask(np.asarray(labels, dtype=int))


class TestColumnNormScores:
    def test_zero_matrix(self):
        assert np.array_equal(column_norm_scores(np.zeros((3, 5))).values, np.zeros(5))

    def test_pythagoras(self):
        A = np.array([[3.0], [4.0]])
        assert column_norm_scores(A).values[0] == 5.0

    def test_brute_force(self):
        A = np.random.default_rng(0).standard_normal((4, 9))
        expected = [np.sqrt(np.sum(A[:, j] ** 2)) for j in range(9)]
        assert np.allclose(column_norm_scores(A).values, expected, atol=1e-12)


class TestMatchedFilter:
    def test_atom_match_scores_one(self):
        R = Dictionary.from_matrix(np.eye(4)[:, :2])
        Y = np.column_stack([R.atoms[:, 0] * 3.0, np.array([0, 0, 0, 1.0])])
        scores = matched_filter(Y, R)
        assert scores.values[0] == pytest.approx(1.0)
        assert scores.values[1] == pytest.approx(0.0, abs=1e-12)

    def test_brute_force(self):
        rng = np.random.default_rng(1)
        Y = rng.standard_normal((6, 7))
        R = Dictionary.from_matrix(rng.standard_normal((6, 3)))
        scores = matched_filter(Y, R)
        for j in range(7):
            yn = Y[:, j] / np.linalg.norm(Y[:, j])
            brute = max(abs(np.dot(R.atoms[:, i], yn)) for i in range(3))
            assert scores.values[j] == pytest.approx(brute, abs=1e-12)


class TestMatchedFilterDagger:
    def test_identity_reduces_to_max_abs(self):
        rng = np.random.default_rng(2)
        Y = rng.standard_normal((4, 6))
        identity = Dictionary(
            atoms=np.eye(4), frame_lower=1.0, frame_upper=1.0, pinv=np.eye(4)
        )
        scores = matched_filter_dagger(Y, identity)
        expected = np.max(np.abs(Y / np.linalg.norm(Y, axis=0)), axis=0)
        assert np.allclose(scores.values, expected, atol=1e-12)

    def test_single_atom_all_ones(self):
        rng = np.random.default_rng(3)
        R = Dictionary.from_matrix(rng.standard_normal((5, 1)))
        Y = rng.standard_normal((5, 8))
        scores = matched_filter_dagger(Y, R)
        assert np.allclose(scores.values, 1.0, atol=1e-12)

    def test_brute_force(self):
        rng = np.random.default_rng(4)
        Y = rng.standard_normal((6, 5))
        R = Dictionary.from_matrix(rng.standard_normal((6, 3)))
        scores = matched_filter_dagger(Y, R)
        Yt = R.pinv @ Y
        for j in range(5):
            col = Yt[:, j] / np.linalg.norm(Yt[:, j])
            assert scores.values[j] == pytest.approx(np.max(np.abs(col)), abs=1e-12)


class TestRoc:
    def test_perfect_separation(self):
        scores = ScoreVector(np.array([0.9, 0.8, 0.1, 0.2]), method="MF")
        curve = roc(scores, mask_of([1, 1, 0, 0]))
        assert curve.auc == 1.0

    def test_constant_scores_diagonal(self):
        scores = ScoreVector(np.full(6, 0.5), method="MF")
        curve = roc(scores, mask_of([1, 0, 1, 0, 1, 0]))
        assert curve.auc == pytest.approx(0.5)

    def test_pairwise_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = 10
            scores = rng.integers(0, 5, n).astype(float)  # forces ties
            labels = rng.integers(0, 2, n)
            if labels.sum() in (0, n):
                continue
            curve = roc(ScoreVector(scores, method="MF"), mask_of(labels))
            assert curve.auc == pytest.approx(auc_pairwise(scores, labels), abs=1e-12)

    def test_auc_invariant_under_increasing_transform(self):
        rng = np.random.default_rng(6)
        scores = rng.standard_normal(30)
        labels = (rng.standard_normal(30) > 0).astype(int)
        labels[0], labels[1] = 0, 1
        a = roc(ScoreVector(scores, method="MF"), mask_of(labels)).auc
        b = roc(ScoreVector(2 * scores + 1, method="MF"), mask_of(labels)).auc
        assert a == pytest.approx(b, abs=1e-12)

    def test_flip_guarantees_half(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            scores = rng.standard_normal(40)
            labels = (scores < 0).astype(int)  # anti-correlated
            labels[0], labels[1] = 0, 1
            curve = roc(ScoreVector(scores, method="MF"), mask_of(labels), allow_flip=True)
            assert curve.auc >= 0.5
        assert curve.flipped

    def test_rates_monotone_in_threshold(self):
        rng = np.random.default_rng(8)
        scores = rng.standard_normal(25)
        labels = rng.integers(0, 2, 25)
        labels[0], labels[1] = 0, 1
        curve = roc(ScoreVector(scores, method="MF"), mask_of(labels))
        assert np.all(np.diff(curve.tpr) >= 0)
        assert np.all(np.diff(curve.fpr) >= 0)

    def test_fixed_grid_sweep(self):
        scores = ScoreVector(np.array([0.91, 0.72, 0.11, 0.33]), method="MF")
        curve = roc(scores, mask_of([1, 1, 0, 0]), sweep="fixed-grid")
        assert curve.thresholds.size == 1002
        assert curve.auc == pytest.approx(1.0)

    def test_single_class_rejected(self):
        with pytest.raises(DegenerateMaskError):
            roc(ScoreVector(np.ones(3), method="MF"), mask_of([1, 1, 1]))

    def test_endpoints(self):
        scores = ScoreVector(np.array([0.2, 0.8, 0.5]), method="MF")
        curve = roc(scores, mask_of([0, 1, 0]))
        assert (curve.fpr[0], curve.tpr[0]) == (0.0, 0.0)
        assert (curve.fpr[-1], curve.tpr[-1]) == (1.0, 1.0)


class TestBestAucOverLambda:
    def make_instance(self):
        # Disjoint-support instance: the target voxels carry the sparse
        # component, everything else is pure low rank.
        Y, X0, A0, R, _ = generate(
            SynthSpec(f=12, nm=30, r=1, d=3, s=6, dictionary_kind="orthonormal-columns", seed=21)
        )
        labels = (np.abs(A0).sum(axis=0) > 0).astype(int)
        return Y, R, GroundTruthMask(labels)

    def test_single_lambda_grid(self):
        Y, R, mask = self.make_instance()
        lam, curve, result = best_auc_over_lambda(Y, R, mask, [0.2])
        assert lam == 0.2

    def test_separable_instance_perfect_auc(self):
        Y, R, mask = self.make_instance()
        grid = lambda_grid(Y, R, 8)
        lam, curve, result = best_auc_over_lambda(
            Y, R, mask, grid, cfg=ApgConfig(lam=float(grid[0]))
        )
        assert curve.auc == pytest.approx(1.0)
