import numpy as np
import pytest

from src.covariance.fir import FirBank, fir_cross_correlation


class TestCrossCorrelation:
    def test_autocorrelation_is_symmetric(self):
        h = np.array([1.0, -0.5, 0.25])
        r = fir_cross_correlation(h, h)
        np.testing.assert_allclose(r, r[::-1])
        assert r[2] == pytest.approx(np.sum(h**2))

    def test_lag_convention(self):
        h1 = np.array([1.0, 2.0])
        h2 = np.array([3.0, 5.0])
        r = fir_cross_correlation(h1, h2)
        # r[tau] = sum_u h1[u] h2[u - tau]; lag +1 pairs h1[1] with h2[0]
        assert r[2] == pytest.approx(2.0 * 3.0)
        assert r[0] == pytest.approx(1.0 * 5.0)

    def test_rejects_mismatched_lengths(self):
        with pytest.raises(ValueError):
            fir_cross_correlation(np.ones(2), np.ones(3))


class TestFirBank:
    @pytest.fixture
    def bank(self):
        rng = np.random.default_rng(3)
        return FirBank(rng.standard_normal((2, 3, 3, 4)), eta=0.4)

    def test_normalize_sets_energies(self, bank):
        normalized = bank.normalize()
        assert normalized.is_normalized()
        energies = normalized.energies()
        np.testing.assert_allclose(energies[:, 0, 0], 1.0)
        np.testing.assert_allclose(energies[:, 0, 1], 0.4)

    def test_unnormalized_bank_detected(self, bank):
        assert not bank.is_normalized()

    def test_zero_eta_zeroes_cross_filters(self, bank):
        normalized = FirBank(bank.taps, eta=0.0).normalize()
        assert np.all(normalized.taps[:, 0, 1] == 0.0)

    def test_all_zero_filter_cannot_be_normalized(self):
        with pytest.raises(ValueError):
            FirBank(np.zeros((1, 1, 1, 2))).normalize()

    def test_source_power_matches_zero_lag(self, bank):
        normalized = bank.normalize()
        r = normalized.lag_generators(0)
        L = normalized.L
        np.testing.assert_allclose(np.diagonal(r[:, :, L - 1]), normalized.source_power())

    def test_lag_generators_are_transposed_mirror(self, bank):
        r = bank.normalize().lag_generators(1)
        # r^(m2,m1)[-tau] = r^(m1,m2)[tau]
        np.testing.assert_allclose(r.transpose(1, 0, 2)[:, :, ::-1], r, atol=1e-14)

    def test_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            FirBank(np.zeros((2, 3, 2, 4)))
