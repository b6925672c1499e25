import numpy as np
import pytest

from hsdemix import dictionary as dct
from hsdemix import errors
from hsdemix.hsio import GroundTruthMask


def random_mask(nm, n_pos, seed=0):
    rng = np.random.default_rng(seed)
    labels = np.zeros(nm, dtype=int)
    labels[rng.choice(nm, size=n_pos, replace=False)] = 1
    return GroundTruthMask(labels)


class TestFrameBounds:
    def test_identity(self):
        f_l, f_u = dct.frame_bounds(np.eye(6))
        assert f_l == pytest.approx(1.0) and f_u == pytest.approx(1.0)

    def test_orthonormal_columns(self):
        Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((8, 3)))
        f_l, f_u = dct.frame_bounds(Q)
        assert f_l == pytest.approx(1.0, abs=1e-12)
        assert f_u == pytest.approx(1.0, abs=1e-12)

    def test_monte_carlo_oracle(self):
        # Brute-force ||Rv||^2 over random unit vectors never exceeds the
        # bounds, and the extremes are approached.
        rng = np.random.default_rng(7)
        R = rng.standard_normal((20, 5))
        f_l, f_u = dct.frame_bounds(R)
        V = rng.standard_normal((5, 100_000))
        V /= np.linalg.norm(V, axis=0)
        sq = np.einsum("ij,ij->j", R @ V, R @ V)
        assert sq.min() >= f_l - 1e-9
        assert sq.max() <= f_u + 1e-9
        assert sq.min() < f_l * 1.2
        assert sq.max() > f_u * 0.8


class TestPseudoInverse:
    def test_identity(self):
        assert np.allclose(dct.pseudo_inverse(np.eye(4)), np.eye(4))

    def test_scalar_column(self):
        R = np.array([[2.0], [0.0]])
        assert np.allclose(dct.pseudo_inverse(R), [[0.5, 0.0]])

    def test_left_inverse_residual(self):
        rng = np.random.default_rng(1)
        R = rng.standard_normal((30, 6))
        pinv = dct.pseudo_inverse(R)
        assert np.max(np.abs(pinv @ R - np.eye(6))) < 1e-10

    def test_rank_deficient_rejected(self):
        R = np.ones((5, 2))
        with pytest.raises(errors.RankError, match="sigma_min"):
            dct.pseudo_inverse(R)


class TestSampleDictionary:
    def test_shape_and_unit_norms(self):
        rng = np.random.default_rng(2)
        Y = rng.standard_normal((20, 50))
        mask = random_mask(50, 12)
        R = dct.sample_dictionary(Y, mask, d=5, seed=3)
        assert R.atoms.shape == (20, 5)
        assert np.allclose(np.linalg.norm(R.atoms, axis=0), 1.0, atol=1e-12)
        assert set(R.atom_indices) <= set(mask.positive_indices)

    def test_all_positives_when_d_equals_count(self):
        rng = np.random.default_rng(2)
        Y = rng.standard_normal((10, 30))
        mask = random_mask(30, 6)
        R1 = dct.sample_dictionary(Y, mask, d=6, seed=9)
        R2 = dct.sample_dictionary(Y, mask, d=6, seed=9)
        assert set(R1.atom_indices) == set(mask.positive_indices)
        assert np.array_equal(R1.atom_indices, R2.atom_indices)

    def test_same_seed_same_atoms(self):
        rng = np.random.default_rng(4)
        Y = rng.standard_normal((15, 40))
        mask = random_mask(40, 10)
        a = dct.sample_dictionary(Y, mask, d=4, seed=5).atom_indices
        b = dct.sample_dictionary(Y, mask, d=4, seed=5).atom_indices
        assert np.array_equal(a, b)

    def test_insufficient_positives(self):
        Y = np.random.default_rng(0).standard_normal((10, 20))
        with pytest.raises(errors.InsufficientSamplesError):
            dct.sample_dictionary(Y, random_mask(20, 3), d=4, seed=0)


class TestLearnDictionary:
    def test_rank_one_case(self):
        col = np.array([3.0, 4.0, 0.0])
        Y = np.tile(col[:, None], (1, 5))
        R = dct.learn_dictionary(Y, d=1, rho=0.01, iters=10, seed=0)
        assert np.allclose(np.abs(R.atoms[:, 0]), col / 5.0, atol=1e-6)

    def test_objective_monotone_over_rounds(self):
        rng = np.random.default_rng(6)
        Y = rng.standard_normal((12, 40))
        for d, rho in ((4, 0.01), (10, 0.5)):
            R = dct.learn_dictionary(Y, d=d, rho=rho, iters=20, seed=1)
            trace = np.array(R.learn_objective)
            assert trace.size == 20
            assert np.all(np.diff(trace) <= 1e-9)

    def test_unit_norm_atoms(self):
        rng = np.random.default_rng(8)
        Y = rng.standard_normal((10, 30))
        R = dct.learn_dictionary(Y, d=4, rho=0.1, iters=15, seed=2)
        assert np.allclose(np.linalg.norm(R.atoms, axis=0), 1.0, atol=1e-12)

    def test_fat_request_rejected(self):
        Y = np.random.default_rng(0).standard_normal((5, 30))
        with pytest.raises(errors.ThinViolationError):
            dct.learn_dictionary(Y, d=6, rho=0.1)


def test_from_matrix_zero_column_rejected():
    R = np.ones((4, 2))
    R[:, 1] = 0.0
    with pytest.raises(errors.DegenerateInputError):
        dct.Dictionary.from_matrix(R)


def test_frame_bound_property_random_vectors():
    rng = np.random.default_rng(10)
    for _ in range(5):
        R = dct.Dictionary.from_matrix(rng.standard_normal((9, 4)))
        v = rng.standard_normal((4, 200))
        ratio = np.einsum("ij,ij->j", R.atoms @ v, R.atoms @ v) / np.einsum(
            "ij,ij->j", v, v
        )
        assert np.all(ratio >= R.frame_lower - 1e-9)
        assert np.all(ratio <= R.frame_upper + 1e-9)
