import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldptail.errors import ConfigError, DegenerateError
from ldptail.marginal import (
    SortedMarginal,
    default_k2,
    fit_log_gw,
    fit_marginals,
    k_sequence,
    nu_diagnostic,
    quantile_hat,
)
from ldptail.special import h_inverse, h_transform
from ldptail.transform import Sample, rank_transform

from oracles import exact_log_gw_sample


def fit_at(values, n=4096, k=(1024, 256, 16)):
    """Sample of size n whose only relevant order statistics sit at the k's."""
    idx = [0] + [n - kk for kk in k] + [n - 1]
    x = np.interp(np.arange(n), idx, [0.5, *values, 2 * values[-1]])
    return SortedMarginal.from_values(x)


class TestKSequence:
    def test_examples(self):
        ks = k_sequence(4096, 16, 2)
        assert (ks.k0, ks.k1, ks.k2) == (1024, 256, 16)
        ks = k_sequence(10000, 25, 2)
        assert (ks.k0, ks.k1, ks.k2) == (2236, 500, 25)

    def test_direct_formula(self):
        for n, k2, iota in [(5000, 73, 2.0), (70128, 125, 2.0), (1000, 10, 3.0), (12345, 40, 1.5)]:
            ks = k_sequence(n, k2, iota)
            assert ks.k1 == math.floor((n / k2) ** (-1 / iota) * n)
            assert ks.k0 == math.floor((n / k2) ** (-1 / iota**2) * n)
            assert ks.k2 <= ks.k1 <= ks.k0 < n

    def test_errors(self):
        with pytest.raises(ConfigError):
            k_sequence(4096, 4096, 2)
        with pytest.raises(ConfigError):
            k_sequence(4096, 16, 1.0)
        with pytest.raises(ConfigError):
            k_sequence(3, 1, 2)
        with pytest.raises(ConfigError):
            k_sequence(100, 0, 2)

    def test_default_k2(self):
        assert default_k2(5000) == math.ceil(math.log(5000) ** 2)
        assert default_k2(70128) == 125

    @given(n=st.integers(50, 10**6), iota=st.floats(1.2, 4.0))
    def test_order_property(self, n, iota):
        k2 = default_k2(n)
        if k2 >= n:
            return
        ks = k_sequence(n, k2, iota)
        assert 1 <= ks.k2 <= ks.k1 <= ks.k0 < n


class TestFit:
    def test_exact_exp_example(self):
        marg = fit_at([4.0, 16.0, 256.0])
        fit = fit_log_gw(marg, k_sequence(4096, 16, 2))
        assert fit.theta_hat == pytest.approx(1.0, abs=1e-14)
        assert fit.g_hat == pytest.approx(math.log(4), rel=1e-14)
        assert fit.anchor == 4.0
        assert fit.y_n == math.log(4096 / 1024)

    def test_double_exp_example(self):
        marg = fit_at([math.e**2, math.e**4, math.e**8])
        fit = fit_log_gw(marg, k_sequence(4096, 16, 2))
        assert fit.theta_hat == pytest.approx(1.0, abs=1e-14)
        assert fit.g_hat == pytest.approx(2.0, rel=1e-14)

    def test_ties_raise(self):
        with pytest.raises(DegenerateError):
            fit_log_gw(fit_at([4.0, 16.0, 16.0]), k_sequence(4096, 16, 2))
        with pytest.raises(DegenerateError):
            fit_log_gw(fit_at([4.0, 4.0, 16.0]), k_sequence(4096, 16, 2))

    def test_nonpositive_anchor(self):
        marg = SortedMarginal.from_values(np.linspace(-5, -1, 4096))
        with pytest.raises(DegenerateError):
            fit_log_gw(marg, k_sequence(4096, 16, 2))

    @pytest.mark.parametrize("theta", [-0.5, 0.0, 0.5, 1.0, 2.0])
    @pytest.mark.parametrize("g,c", [(1.0, 1.0), (0.3, 7.5), (2.5, 0.2)])
    def test_exact_recovery(self, theta, g, c):
        n, k2 = 4096, 16
        y_n = math.log(4)
        marg = exact_log_gw_sample(n, theta, g, c, y_n)
        fit = fit_log_gw(marg, k_sequence(n, k2, 2.0))
        assert fit.theta_hat == pytest.approx(theta, abs=1e-10)
        assert fit.g_hat == pytest.approx(g, rel=1e-10)
        z = 2 * fit.y_n
        expected = c * math.exp(g * h_transform(theta, 2.0))
        assert quantile_hat(fit, marg, z) == pytest.approx(expected, rel=1e-10)

    def test_sorted_marginal_invariants(self):
        with pytest.raises(ConfigError):
            SortedMarginal(np.array([1.0, 3.0, 2.0, 4.0]))
        with pytest.raises(ConfigError):
            SortedMarginal.from_values([1.0, 2.0, 3.0])
        m = SortedMarginal.from_values([4.0, 1.0, 3.0, 2.0])
        np.testing.assert_array_equal(m.values, [1, 2, 3, 4])
        assert m.upper(1) == 4.0 and m.upper(4) == 1.0


class TestQuantileHat:
    def setup_method(self):
        self.marg = fit_at([4.0, 16.0, 256.0])
        self.fit = fit_log_gw(self.marg, k_sequence(4096, 16, 2))

    def test_examples(self):
        assert quantile_hat(self.fit, self.marg, 0.0) == self.marg.values[0]
        assert quantile_hat(self.fit, self.marg, self.fit.y_n) == self.fit.anchor
        assert quantile_hat(self.fit, self.marg, 2 * self.fit.y_n) == pytest.approx(16.0, rel=1e-14)

    def test_empirical_branch_index(self):
        marg = self.marg
        n = marg.n
        for i in (1, 2, 100, 2000, n - 1024):
            z = -math.log(1 - (i - 1) / n)
            if z > self.fit.y_n:
                continue
            assert quantile_hat(self.fit, marg, z) == marg.values[i - 1]

    def test_vectorised(self):
        z = np.array([0.0, 0.5, self.fit.y_n, 3.0, 10.0])
        got = quantile_hat(self.fit, self.marg, z)
        want = [quantile_hat(self.fit, self.marg, float(v)) for v in z]
        np.testing.assert_array_equal(got, want)

    def test_monotone(self):
        rng = np.random.default_rng(3)
        x = np.sort(rng.exponential(size=5000)) + 1.0
        marg = SortedMarginal.from_values(x)
        fit = fit_log_gw(marg, k_sequence(5000, default_k2(5000), 2.0))
        z = np.linspace(0, 30, 3001)
        assert np.all(np.diff(quantile_hat(fit, marg, z)) >= 0)

    def test_inverts_pseudo_observations(self):
        rng = np.random.default_rng(11)
        x = rng.lognormal(size=(3000, 1))
        pseudo = rank_transform(Sample(x, ("x",)))
        margs, fits = fit_marginals(x)
        y = pseudo.rows[:, 0]
        keep = y <= fits[0].y_n
        np.testing.assert_array_equal(quantile_hat(fits[0], margs[0], y[keep]), x[keep, 0])


class TestNu:
    def test_exact_fit_gives_zero(self):
        theta, g, c = 0.5, 1.3, 2.0
        y_n = math.log(4)
        marg = exact_log_gw_sample(4096, theta, g, c, y_n)
        fit = fit_log_gw(marg, k_sequence(4096, 16, 2.0))

        def q_inv(x):
            # invert c exp(g h(z / y_n)) in closed form
            return y_n * h_inverse(theta, math.log(x / c) / g)

        for z in (1.5, 3.0, 8.0):
            assert nu_diagnostic(fit, marg, q_inv, z) == pytest.approx(0.0, abs=1e-10)

    def test_doubling(self):
        marg = fit_at([4.0, 16.0, 256.0])
        fit = fit_log_gw(marg, k_sequence(4096, 16, 2))
        # the fitted tail is q(z) = exp(z); a model with q(z) = exp(z / 2) sees q_hat(z) = q(2z)
        z = 3.0
        assert nu_diagnostic(fit, marg, lambda x: 2 * math.log(x), z) == pytest.approx(1.0, rel=1e-12)

    def test_exponential_brute_force(self):
        rng = np.random.default_rng(5)
        x = rng.exponential(size=2000)
        marg = SortedMarginal.from_values(x)
        fit = fit_log_gw(marg, k_sequence(2000, default_k2(2000), 2.0))
        z = fit.y_n
        qh = quantile_hat(fit, marg, z)
        direct = -math.log(1 - (1 - math.exp(-qh))) / z - 1
        assert nu_diagnostic(fit, marg, lambda v: v, z) == pytest.approx(direct, rel=1e-12)

    def test_domain(self):
        marg = fit_at([4.0, 16.0, 256.0])
        fit = fit_log_gw(marg, k_sequence(4096, 16, 2))
        with pytest.raises(ConfigError):
            nu_diagnostic(fit, marg, lambda v: v, 0.0)

    @pytest.mark.slow
    def test_pareto_consistency(self):
        # Pareto margin: q(z) = e^z, so q^{-1} = log. sup over lambda in [1, 2] of |nu| shrinks with n.
        lam = np.linspace(1, 2, 41)
        sups = []
        for n in (10**3, 10**4, 10**5):
            per_seed = []
            for seed in range(20):
                x = np.exp(np.random.default_rng([n, seed]).exponential(size=n))
                marg = SortedMarginal.from_values(x)
                fit = fit_log_gw(marg, k_sequence(n, default_k2(n), 2.0))
                nu = [nu_diagnostic(fit, marg, math.log, fit.y_n * l) for l in lam]
                per_seed.append(np.max(np.abs(nu)))
            sups.append(float(np.median(per_seed)))
        assert sups[0] > sups[1] > sups[2]


@settings(max_examples=30, deadline=None)
@given(theta=st.sampled_from([-0.5, 0.0, 0.5, 1.0, 2.0]), g=st.floats(0.1, 5.0), c=st.floats(0.1, 10.0))
def test_recovery_property(theta, g, c):
    marg = exact_log_gw_sample(4096, theta, g, c, math.log(4))
    fit = fit_log_gw(marg, k_sequence(4096, 16, 2.0))
    assert fit.theta_hat == pytest.approx(theta, abs=1e-9)
    assert fit.g_hat == pytest.approx(g, rel=1e-9)
