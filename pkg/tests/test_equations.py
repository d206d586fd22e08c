import numpy as np
import pytest

from src.core.errors import SingularJacobianError
from src.core.model import DemixingSet, TargetSet
from src.harness.selftest import finite_difference_jacobian, random_bank, sample_targets
from src.sedjoco.equations import JacobianH, drilled_check, jacobian, residual


def _diagonal_targets(M: int, K: int) -> TargetSet:
    Q = np.zeros((K, M, M, K, K))
    for k in range(K):
        Q[k] = np.eye(K)[None, None] * (1.0 / M)
    return TargetSet(Q)


class TestResidual:
    def test_identity_solves_scaled_identity_targets(self):
        # sum over l of Q_k^(l,m) contributes M copies of 1/M on the diagonal
        Q = _diagonal_targets(2, 3)
        F = residual(DemixingSet.identity(2, 3), Q)
        assert F.max_abs() == pytest.approx(0.0, abs=1e-15)

    def test_vec_layout(self):
        Q = _diagonal_targets(1, 2)
        B = DemixingSet(np.array([[[2.0, 0.0], [0.0, 1.0]]]))
        F = residual(B, Q)
        assert F.vec()[0] == pytest.approx(3.0)
        assert F.vec()[3] == pytest.approx(0.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            residual(DemixingSet.identity(2, 2), _diagonal_targets(2, 3))


class TestJacobian:
    @pytest.mark.parametrize("M,K", [(1, 2), (2, 2), (2, 3)])
    def test_matches_finite_differences(self, M, K):
        rng = np.random.default_rng(M * 10 + K)
        bank = random_bank(K, M, 3, 0.2, rng)
        Q, _ = sample_targets(bank, bank, 30, rng)
        B = DemixingSet(np.eye(K) + 0.1 * rng.standard_normal((M, K, K)))
        np.testing.assert_allclose(
            jacobian(B, Q).matrix, finite_difference_jacobian(B, Q), rtol=1e-5, atol=1e-7
        )

    def test_singular_jacobian_raises(self):
        H = JacobianH(np.zeros((4, 4)))
        with pytest.raises(SingularJacobianError):
            H.solve(np.ones(4))

    def test_condition_cached(self):
        H = JacobianH(np.eye(3))
        assert H.condition() == pytest.approx(1.0)
        np.testing.assert_allclose(H.solve(np.arange(3.0)), np.arange(3.0))


class TestDrilledCheck:
    def test_zero_at_solution_of_diagonal_problem(self):
        Q = _diagonal_targets(3, 2)
        assert drilled_check(DemixingSet.identity(3, 2), Q) == pytest.approx(0.0, abs=1e-15)
