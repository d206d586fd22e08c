import numpy as np
import pytest

from src.sourcegen.zeros import (
    ZeroSet,
    bank_from_zeros,
    draw_zero_bank,
    draw_zeros,
    fir_from_zeros,
    interpolate_zeros,
    perturb_zeros,
    zero_counts,
)


class TestZeroCounts:
    @pytest.mark.parametrize("L,expected", [(1, (0, 0)), (2, (1, 0)), (3, (0, 1)), (4, (1, 1)), (10, (1, 4))])
    def test_counts(self, L, expected):
        assert zero_counts(L) == expected

    def test_rejects_zero_length(self):
        with pytest.raises(ValueError):
            zero_counts(0)


class TestDrawZeros:
    def test_radii_inside_unit_disk(self):
        z = draw_zeros(2.0, 10, np.random.default_rng(80), shape=(50,))
        radii = z.radii()
        assert np.all(radii <= 1.0)
        assert np.all(radii >= np.exp(-2.0))

    def test_pair_phases_in_upper_half_plane(self):
        z = draw_zeros(2.0, 9, np.random.default_rng(81), shape=(20,))
        assert np.all(np.angle(z.pairs) >= 0.0)
        assert z.real.shape == (20, 0)
        assert z.L == 9

    def test_rejects_non_positive_a(self):
        with pytest.raises(ValueError):
            draw_zeros(0.0, 4, np.random.default_rng(0))


class TestPerturbZeros:
    @pytest.fixture
    def z0(self):
        return draw_zeros(2.0, 10, np.random.default_rng(82), shape=(3,))

    def test_radii_attenuated(self, z0):
        z1 = perturb_zeros(z0, 0.1, 0.1, np.random.default_rng(83))
        np.testing.assert_allclose(z1.radii(), 0.9 * z0.radii())

    def test_real_zero_keeps_zero_phase(self, z0):
        z1 = perturb_zeros(z0, 0.5, 0.0, np.random.default_rng(84))
        assert np.all(np.isreal(z1.real))
        np.testing.assert_allclose(z1.real, z0.real)

    def test_no_noise_no_attenuation_is_identity(self, z0):
        z1 = perturb_zeros(z0, 0.0, 0.0, np.random.default_rng(85))
        np.testing.assert_allclose(z1.pairs, z0.pairs)

    @pytest.mark.parametrize("b,c", [(-0.1, 0.1), (0.1, 1.0), (0.1, -0.2)])
    def test_invalid_parameters(self, z0, b, c):
        with pytest.raises(ValueError):
            perturb_zeros(z0, b, c, np.random.default_rng(0))


class TestInterpolateZeros:
    def test_endpoints(self):
        rng = np.random.default_rng(86)
        z0 = draw_zeros(2.0, 6, rng, shape=(2,))
        z1 = perturb_zeros(z0, 0.2, 0.1, rng)
        np.testing.assert_allclose(interpolate_zeros(z0, z1, 0.0).pairs, z0.pairs)
        np.testing.assert_allclose(interpolate_zeros(z0, z1, 1.0).pairs, z1.pairs)

    def test_rejects_mu_outside_unit_interval(self):
        z = draw_zeros(2.0, 4, np.random.default_rng(87))
        with pytest.raises(ValueError):
            interpolate_zeros(z, z, 1.5)


class TestFirFromZeros:
    def test_energy_and_zeros(self):
        z = draw_zeros(2.0, 6, np.random.default_rng(88))
        taps = fir_from_zeros(z, 0.5)
        assert taps.shape == (6,)
        assert np.sum(taps**2) == pytest.approx(0.5)
        roots = np.sort_complex(np.roots(taps))
        np.testing.assert_allclose(roots, np.sort_complex(z.all_zeros()), atol=1e-6)

    def test_single_tap(self):
        z = ZeroSet(real=np.zeros((0,)), pairs=np.zeros((0,), dtype=complex))
        np.testing.assert_allclose(fir_from_zeros(z, 4.0), [2.0])

    def test_taps_are_real(self):
        z = draw_zeros(2.0, 5, np.random.default_rng(89), shape=(4,))
        assert fir_from_zeros(z).dtype == np.float64


class TestBankFromZeros:
    def test_bank_is_normalized(self):
        z = draw_zero_bank(3, 2, 10, 2.0, np.random.default_rng(90))
        bank = bank_from_zeros(z, eta=0.3)
        assert bank.taps.shape == (3, 2, 2, 10)
        assert bank.is_normalized()

    def test_rejects_wrong_batch_shape(self):
        z = draw_zeros(2.0, 4, np.random.default_rng(91), shape=(3, 2))
        with pytest.raises(ValueError):
            bank_from_zeros(z, eta=1.0)
