import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from ldptail.errors import DataError, DimensionError
from ldptail.marginal import SortedMarginal, fit_log_gw, k_sequence, quantile_hat
from ldptail.transform import (
    PseudoSample,
    QHatMap,
    Sample,
    TieWarning,
    empirical_probability,
    plotting_positions,
    q_hat_map,
    rank_transform,
)


def exp_fit():
    n = 4096
    idx = [0, n - 1024, n - 256, n - 16, n - 1]
    x = np.interp(np.arange(n), idx, [0.5, 4.0, 16.0, 256.0, 512.0])
    marg = SortedMarginal.from_values(x)
    return fit_log_gw(marg, k_sequence(n, 16, 2.0)), marg


class TestRankTransform:
    def test_example(self):
        ps = rank_transform(Sample(np.array([[3.0], [1.0], [2.0], [4.0]])))
        np.testing.assert_array_equal(ps.ranks[:, 0], [3, 1, 2, 4])
        want = [-math.log(1 - 2.5 / 4), -math.log(1 - 0.5 / 4), -math.log(1 - 1.5 / 4), -math.log(1 - 3.5 / 4)]
        np.testing.assert_allclose(ps.rows[:, 0], want, rtol=1e-15)
        np.testing.assert_allclose(ps.rows[:, 0], [0.98083, 0.13353, 0.47000, 2.07944], atol=5e-6)

    def test_single_point(self):
        ps = rank_transform(Sample(np.array([[17.0, -2.0]])))
        np.testing.assert_array_equal(ps.ranks, [[1, 1]])
        np.testing.assert_allclose(ps.rows, [[math.log(2), math.log(2)]], rtol=1e-15)

    def test_ties(self):
        with pytest.warns(TieWarning):
            ps = rank_transform(Sample(np.array([[1.0], [1.0]])))
        np.testing.assert_array_equal(ps.ranks[:, 0], [1, 2])
        assert ps.tie_columns == (0,)

    def test_no_warning_without_ties(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            ps = rank_transform(Sample(np.arange(10.0)[:, None]))
        assert ps.tie_columns == ()

    def test_max_entry(self):
        rng = np.random.default_rng(0)
        for n in (1, 7, 1000):
            ps = rank_transform(Sample(rng.normal(size=(n, 3))))
            assert ps.rows.max() == pytest.approx(-math.log(1 / (2 * n)), rel=1e-15)
            assert np.all(ps.rows > 0)

    def test_columns_are_grid_permutations(self):
        rng = np.random.default_rng(1)
        x = rng.standard_t(3, size=(500, 2))
        ps = rank_transform(Sample(x))
        grid = plotting_positions(500)
        for j in range(2):
            np.testing.assert_array_equal(np.sort(ps.rows[:, j]), grid)
            np.testing.assert_array_equal(np.sort(ps.ranks[:, j]), np.arange(1, 501))

    @settings(max_examples=50, deadline=None)
    @given(x=hnp.arrays(np.float64, st.tuples(st.integers(1, 40), st.integers(1, 3)),
                        elements=st.integers(-1000, 1000).map(float), unique=True))
    def test_invariant_under_increasing_maps(self, x):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TieWarning)
            a = rank_transform(Sample(x))
            # exact in double precision for integer-valued x, hence strictly increasing
            b = rank_transform(Sample(2.0 * x**3 - 5.0))
        np.testing.assert_array_equal(a.rows, b.rows)

    def test_sample_validation(self):
        with pytest.raises(DataError):
            Sample(np.array([[1.0, np.nan]]))
        with pytest.raises(DataError):
            Sample(np.zeros((0, 2)))
        with pytest.raises(DataError):
            Sample(np.zeros((3, 2)), ("a",))

    def test_from_exact(self):
        ps = PseudoSample.from_exact([0.5, 1.5])
        assert ps.rows.shape == (2, 1) and ps.ranks is None


class TestQHatMap:
    def test_reduces_to_quantile_hat(self):
        fit, marg = exp_fit()
        z = np.array([[0.0], [1.0], [5.0]])
        np.testing.assert_array_equal(q_hat_map([fit], [marg], z)[:, 0], quantile_hat(fit, marg, z[:, 0]))

    def test_zero_gives_minima(self):
        fit, marg = exp_fit()
        np.testing.assert_array_equal(q_hat_map([fit, fit], [marg, marg], [0.0, 0.0]), [0.5, 0.5])

    def test_example(self):
        fit, marg = exp_fit()
        got = q_hat_map([fit, fit], [marg, marg], [2 * fit.y_n, fit.y_n])
        np.testing.assert_allclose(got, [16.0, 4.0], rtol=1e-14)

    def test_dimension(self):
        fit, marg = exp_fit()
        with pytest.raises(DimensionError):
            QHatMap([fit], [marg])(np.zeros((3, 2)))


class TestEmpiricalProbability:
    def test_examples(self):
        assert empirical_probability([True, False, False, False]) == 0.25
        assert empirical_probability([False] * 9) == 0.0
        flags = np.zeros(70128, dtype=bool)
        flags[:41] = True
        assert abs(empirical_probability(flags) - 5.847e-4) < 1e-6
        assert empirical_probability(flags) == 41 / 70128
