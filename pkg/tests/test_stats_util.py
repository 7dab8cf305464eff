import math

import numpy as np
import pytest
import scipy.special
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from reprologit.stats_util import (
    SummaryTable,
    chi2_quantile,
    log_binom,
    log_gamma,
    merge_intervals,
    numerical_rank,
    reg_lower_gamma,
)


class TestSpecialFunctions:
    def test_log_gamma_matches_stdlib(self):
        for x in [0.05, 0.3, 0.5, 1.0, 1.5, 2.0, 7.25, 40.0, 123.456, 5000.0]:
            assert log_gamma(x) == pytest.approx(math.lgamma(x), rel=1e-12, abs=1e-12)

    def test_log_gamma_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            log_gamma(0.0)
        with pytest.raises(ValueError):
            log_gamma(-2.5)

    def test_log_binom(self):
        assert log_binom(10, 2) == pytest.approx(math.log(45), rel=1e-12)
        assert log_binom(5, 0) == 0.0
        assert log_binom(5, 5) == 0.0
        assert log_binom(1000, 37) == pytest.approx(
            scipy.special.gammaln(1001) - scipy.special.gammaln(38) - scipy.special.gammaln(964),
            rel=1e-12,
        )

    def test_reg_lower_gamma_against_scipy(self):
        for a in [0.5, 1.0, 2.5, 10.0, 55.0]:
            for x in [0.0, 0.1, 1.0, a, 3 * a + 5]:
                assert reg_lower_gamma(a, x) == pytest.approx(
                    scipy.special.gammainc(a, x), abs=1e-12
                )

    def test_chi2_quantile_df2_closed_form(self):
        # df=2 quantile has the closed form -2 log(1 - alpha)
        for alpha in [0.05, 0.5, 0.9, 0.95, 0.99]:
            assert chi2_quantile(2, alpha) == pytest.approx(
                -2.0 * math.log1p(-alpha), abs=1e-8
            )

    def test_chi2_quantile_df1_squared_normal(self):
        # df=1 quantile is the square of the two-sided normal quantile
        z = scipy.stats.norm.ppf(0.975)
        assert chi2_quantile(1, 0.95) == pytest.approx(z * z, abs=1e-8)
        assert chi2_quantile(1, 0.95) == pytest.approx(3.84146, abs=1e-5)

    def test_chi2_quantile_small_alpha_boundary(self):
        assert chi2_quantile(3, 1e-12) < 1e-3
        assert chi2_quantile(1, 1e-9) >= 0.0

    def test_chi2_quantile_matches_scipy_broadly(self):
        for df in [1, 2, 3, 7, 20, 100]:
            for alpha in [0.01, 0.25, 0.75, 0.95, 0.999]:
                assert chi2_quantile(df, alpha) == pytest.approx(
                    scipy.stats.chi2.ppf(alpha, df), rel=1e-9, abs=1e-8
                )

    def test_chi2_quantile_validates(self):
        with pytest.raises(ValueError):
            chi2_quantile(0, 0.5)
        with pytest.raises(ValueError):
            chi2_quantile(3, 1.0)


class TestMergeIntervals:
    def test_touching_merge(self):
        union = merge_intervals([(1.0, 2.0), (2.0, 3.0)])
        assert union.intervals == ((1.0, 3.0),)
        assert union.measure == pytest.approx(2.0)

    def test_empty(self):
        union = merge_intervals([])
        assert union.intervals == ()
        assert union.measure == 0.0

    def test_rejects_inverted(self):
        with pytest.raises(ValueError):
            merge_intervals([(2.0, 1.0)])
        with pytest.raises(ValueError):
            merge_intervals([(0.0, math.inf)])

    def test_measure_against_grid_oracle(self):
        rng = np.random.default_rng(42)
        lo = rng.uniform(-10, 10, size=100)
        hi = lo + rng.uniform(0, 3, size=100)
        union = merge_intervals(list(zip(lo, hi)))
        # brute-force fine-grid estimate of the union's measure
        grid = np.linspace(-14, 14, 2_000_001)
        covered = np.zeros(grid.shape, dtype=bool)
        for a, b in zip(lo, hi):
            covered |= (grid >= a) & (grid <= b)
        est = covered.mean() * (grid[-1] - grid[0])
        assert union.measure == pytest.approx(est, abs=3e-3)

    @given(
        st.lists(
            st.tuples(
                st.floats(-50, 50, allow_nan=False),
                st.floats(0, 10, allow_nan=False),
            ),
            max_size=30,
        )
    )
    @settings(max_examples=200, deadline=None)
    def test_idempotent_and_order_invariant(self, raw):
        intervals = [(lo, lo + w) for lo, w in raw]
        u1 = merge_intervals(intervals)
        u2 = merge_intervals(list(reversed(intervals)))
        assert u1.intervals == u2.intervals
        again = merge_intervals(list(u1.intervals))
        assert again.intervals == u1.intervals

    def test_contains(self):
        union = merge_intervals([(0.0, 1.0)], contains_point_zero=True)
        assert union.contains(0.5)
        assert union.contains(0.0)
        assert not union.contains(2.0)
        point = merge_intervals([], contains_point_zero=True)
        assert point.contains(0.0)
        assert not point.contains(1e-6)


class TestNumericalRank:
    def test_identity(self):
        assert numerical_rank(np.eye(3)) == 3

    def test_rank_one_outer_product(self):
        u = np.arange(1.0, 6.0)
        v = np.array([2.0, -1.0, 0.5])
        assert numerical_rank(np.outer(u, v)) == 1

    def test_duplicated_rows(self):
        # 5 x 8 with one duplicated pair of rows: 4 independent rows remain
        rng = np.random.default_rng(3)
        a = rng.standard_normal((5, 8))
        a[4] = a[1]
        assert numerical_rank(a) == 4

    def test_zero_matrix(self):
        assert numerical_rank(np.zeros((4, 6))) == 0

    @given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 1000))
    @settings(max_examples=60, deadline=None)
    def test_transpose_invariance(self, nr, nc, seed):
        a = np.random.default_rng(seed).standard_normal((nr, nc))
        assert numerical_rank(a) == numerical_rank(a.T)


class TestSummaryTable:
    def test_single_value_has_zero_std(self):
        table = SummaryTable.from_values({("s", "m", "x"): [0.7]})
        mean, std, n = table.get("s", "m", "x")
        assert (mean, std, n) == (0.7, 0.0, 1)

    def test_mean_std(self):
        vals = [1.0, 2.0, 3.0, 4.0]
        table = SummaryTable.from_values({("s", "m", "x"): vals})
        mean, std, n = table.get("s", "m", "x")
        assert mean == pytest.approx(np.mean(vals))
        assert std == pytest.approx(np.std(vals, ddof=1))
        assert n == 4
