import numpy as np
import pytest
from scipy import stats

from src.sourcegen.noise import NoiseFamily, NoiseSpec, gen_white


class TestNoiseSpec:
    @pytest.mark.parametrize("name", ["gaussian", "Uniform", "BERNOULLI", "laplace"])
    def test_parse(self, name):
        assert NoiseSpec.parse(name).family == NoiseFamily(name.lower())

    def test_parse_unknown(self):
        with pytest.raises(ValueError, match="unknown noise family"):
            NoiseSpec.parse("cauchy")


class TestGenWhite:
    @pytest.mark.parametrize("family", list(NoiseFamily))
    def test_zero_mean_unit_variance(self, family):
        x = gen_white(NoiseSpec(family), 200_000, np.random.default_rng(100))
        assert abs(np.mean(x)) < 0.01
        assert np.var(x) == pytest.approx(1.0, abs=0.02)

    def test_bernoulli_is_plus_minus_one(self):
        x = gen_white(NoiseSpec(NoiseFamily.BERNOULLI), 1000, np.random.default_rng(101))
        assert set(np.unique(x)) == {-1.0, 1.0}

    def test_uniform_support(self):
        x = gen_white(NoiseSpec(NoiseFamily.UNIFORM), 1000, np.random.default_rng(102))
        assert np.max(np.abs(x)) <= np.sqrt(3.0)

    def test_shape_tuple(self):
        assert gen_white(NoiseSpec(), (2, 3, 4), np.random.default_rng(103)).shape == (2, 3, 4)

    def test_reproducible(self):
        a = gen_white(NoiseSpec(), 10, np.random.default_rng(5))
        b = gen_white(NoiseSpec(), 10, np.random.default_rng(5))
        np.testing.assert_array_equal(a, b)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            gen_white(NoiseSpec(), 0, np.random.default_rng(0))


class TestDistributions:
    @pytest.mark.parametrize(
        "family,reference",
        [
            (NoiseFamily.GAUSSIAN, stats.norm()),
            (NoiseFamily.UNIFORM, stats.uniform(loc=-np.sqrt(3.0), scale=2 * np.sqrt(3.0))),
            (NoiseFamily.LAPLACE, stats.laplace(scale=1.0 / np.sqrt(2.0))),
        ],
    )
    def test_kolmogorov_smirnov(self, family, reference):
        x = gen_white(NoiseSpec(family), 5000, np.random.default_rng(104))
        assert stats.kstest(x, reference.cdf).pvalue > 1e-3

    def test_laplace_excess_kurtosis(self):
        x = gen_white(NoiseSpec(NoiseFamily.LAPLACE), 200_000, np.random.default_rng(105))
        assert stats.kurtosis(x) == pytest.approx(3.0, abs=0.5)
