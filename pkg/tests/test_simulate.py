import math

import numpy as np
import pytest

from ldptail.errors import ConfigError, DegenerateError, DomainError
from ldptail.simulate import (
    SimConfig,
    cholesky_lower,
    corner_exact_prob,
    halfspace_exact_prob,
    halfspace_threshold,
    rng_for,
    sample_mvn,
)
from ldptail.special import std_normal_quantile


class TestConfig:
    def test_errors(self):
        with pytest.raises(ConfigError):
            SimConfig(n=0)
        with pytest.raises(ConfigError):
            SimConfig(n=5, marginal_scale="gumbel")
        with pytest.raises(ConfigError):
            SimConfig(n=5, correlation=((1.0, 0.5),))

    def test_cholesky(self):
        v = np.array([[1.0, 0.3, -0.2], [0.3, 1.0, 0.5], [-0.2, 0.5, 1.0]])
        L = cholesky_lower(v)
        np.testing.assert_allclose(L @ L.T, v, atol=1e-15)
        np.testing.assert_allclose(L, np.linalg.cholesky(v), atol=1e-15)

    def test_cholesky_errors(self):
        with pytest.raises(ConfigError):
            cholesky_lower([[1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(ConfigError):
            cholesky_lower([[1.0, 0.5], [0.4, 1.0]])
        with pytest.raises(ConfigError):
            sample_mvn(SimConfig(n=3, correlation=((1.0, 0.9, 0.9), (0.9, 1.0, -0.9), (0.9, -0.9, 1.0))))


class TestSample:
    def test_determinism(self):
        cfg = SimConfig.bivariate(1000, 0.5, "exponential", 42)
        a, b = sample_mvn(cfg, 3), sample_mvn(cfg, 3)
        assert a.values.tobytes() == b.values.tobytes()
        assert not np.array_equal(a.values, sample_mvn(cfg, 4).values)

    def test_substreams_order_free(self):
        cfg = SimConfig.bivariate(200, 0.2, "normal", 7)
        forward = [sample_mvn(cfg, r).values for r in range(6)]
        backward = {r: sample_mvn(cfg, r).values for r in reversed(range(6))}
        for r in range(6):
            assert forward[r].tobytes() == backward[r].tobytes()

    def test_rng_tuple_index(self):
        assert rng_for(1, (2, 3)).random() == rng_for(1, [2, 3]).random()
        assert rng_for(1, 2).random() != rng_for(1, (2, 3)).random()

    def test_normal_moments(self):
        x = sample_mvn(SimConfig.bivariate(100_000, 0.5, "normal", 1)).values
        assert abs(np.corrcoef(x.T)[0, 1] - 0.5) <= 0.02
        np.testing.assert_allclose(x.mean(axis=0), 0.0, atol=0.02)
        np.testing.assert_allclose(x.std(axis=0), 1.0, atol=0.02)

    def test_independent(self):
        x = sample_mvn(SimConfig.bivariate(100_000, 0.0, "normal", 2)).values
        assert abs(np.corrcoef(x.T)[0, 1]) <= 0.02

    def test_exponential_scale(self):
        y = sample_mvn(SimConfig.bivariate(100_000, 0.5, "exponential", 3)).values
        np.testing.assert_allclose(y.mean(axis=0), 1.0, atol=0.02)
        assert np.all(y > 0)

    def test_scales_share_uniforms(self):
        base = SimConfig.bivariate(500, 0.3, "normal", 5)
        u = sample_mvn(base).values
        y = sample_mvn(SimConfig.bivariate(500, 0.3, "exponential", 5)).values
        p = sample_mvn(SimConfig.bivariate(500, 0.3, "pareto", 5)).values
        np.testing.assert_allclose(y, -np.log(0.5 * np.vectorize(math.erfc)(u / math.sqrt(2))), rtol=1e-10)
        np.testing.assert_allclose(p, np.exp(y), rtol=1e-12)

    def test_columns(self):
        s = sample_mvn(SimConfig(n=4, correlation=np.eye(3)))
        assert s.column_names == ("x1", "x2", "x3") and s.values.shape == (4, 3)


class TestHalfspaceProb:
    def test_examples(self):
        for rho in (-0.6, 0.0, 0.5):
            assert halfspace_exact_prob((0, 1), 1.2816, rho) == pytest.approx(0.100, abs=1e-4)
        assert halfspace_exact_prob((1, 1), 3.0, 0.5) == pytest.approx(0.5 * math.erfc(math.sqrt(1.5)), rel=1e-12)
        assert halfspace_exact_prob((1, 1), 3.0, 0.5) == pytest.approx(0.0416, abs=1e-4)

    def test_threshold(self):
        c = halfspace_threshold((0.5, 1.0), 0.5, 4e-8)
        assert c == pytest.approx(math.sqrt(1.75) * std_normal_quantile(1 - 4e-8), rel=1e-7)
        assert halfspace_exact_prob((0.5, 1.0), c, 0.5) == pytest.approx(4e-8, rel=1e-12)

    def test_errors(self):
        with pytest.raises(DegenerateError):
            halfspace_exact_prob((0, 0), 0.0, 0.5)
        with pytest.raises(DomainError):
            halfspace_exact_prob((1, 1), 0.0, 1.0)
        with pytest.raises(DegenerateError):
            halfspace_threshold((0, 0), 0.5, 0.1)

    @pytest.mark.parametrize("a,c,rho", [((1.0, 1.0), 3.0, 0.5), ((0.5, 1.0), 2.5, 0.5), ((-0.5, 1.0), 2.0, 0.3)])
    def test_monte_carlo(self, a, c, rho):
        n = 10_000_000
        hits = 0
        cfg = SimConfig.bivariate(n // 4, rho, "normal", 99)
        for r in range(4):
            u = sample_mvn(cfg, r).values
            hits += int(np.sum(a[0] * u[:, 0] + a[1] * u[:, 1] > c))
        p = halfspace_exact_prob(a, c, rho)
        assert p >= 1e-4
        assert abs(hits / n - p) <= 4 * math.sqrt(p * (1 - p) / n)


class TestCornerProb:
    def test_examples(self):
        l2 = math.log(2.0)
        assert corner_exact_prob((l2, l2), 0.0) == pytest.approx(0.25, abs=1e-12)
        assert corner_exact_prob((l2, l2), 0.5) == pytest.approx(1 / 3, abs=1e-10)
        for x in (0.3, 2.0, 7.0):
            assert corner_exact_prob((x, 0.0), 0.6) == pytest.approx(math.exp(-x), rel=1e-10)

    def test_negative(self):
        with pytest.raises(DomainError):
            corner_exact_prob((-1.0, 1.0), 0.5)
