import numpy as np
import pytest

from src.covariance.scv import BandedPrecision, scv_covariance_from_firs, scv_precision
from src.harness.selftest import random_bank
from src.sedjoco.targets import compute_targets, symmetrize_pairs
from src.sourcegen.noise import NoiseSpec
from src.sourcegen.sources import gen_sources


class TestComputeTargets:
    @pytest.fixture
    def setup(self):
        rng = np.random.default_rng(10)
        bank = random_bank(3, 2, 3, 0.2, rng)
        covs = [scv_covariance_from_firs(bank, k, 40) for k in range(3)]
        X = gen_sources(bank, NoiseSpec(), 40, rng)
        return X, covs

    def test_shape_and_symmetry(self, setup):
        X, covs = setup
        Q = compute_targets(X, [scv_precision(cov) for cov in covs])
        assert Q.Q.shape == (3, 2, 2, 3, 3)
        assert Q.symmetry_defect() == 0.0

    def test_matches_explicit_quadratic_form(self, setup):
        X, covs = setup
        P = scv_precision(covs[1])
        Q = compute_targets(X, [scv_precision(cov) for cov in covs])
        expected = X[0] @ P.block(0, 1) @ X[1].T / 40
        np.testing.assert_allclose(Q.block(1, 0, 1), expected, rtol=1e-10)

    def test_banded_and_dense_agree(self, setup):
        X, covs = setup
        dense = compute_targets(X, [scv_precision(cov) for cov in covs])
        banded = compute_targets(X, [BandedPrecision(cov) for cov in covs])
        np.testing.assert_allclose(banded.Q, dense.Q, rtol=1e-8, atol=1e-10)

    def test_precision_count_must_match(self, setup):
        X, covs = setup
        with pytest.raises(ValueError):
            compute_targets(X, [scv_precision(covs[0])])

    def test_rejects_two_dimensional_data(self, setup):
        _, covs = setup
        with pytest.raises(ValueError):
            compute_targets(np.zeros((3, 40)), [scv_precision(cov) for cov in covs])


class TestSymmetrizePairs:
    def test_enforces_transpose_relation(self):
        blocks = np.random.default_rng(11).standard_normal((3, 3, 2, 2))
        out = symmetrize_pairs(blocks)
        for m1 in range(3):
            for m2 in range(3):
                np.testing.assert_array_equal(out[m2, m1], out[m1, m2].T)
