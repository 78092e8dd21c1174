"""Roughness estimation: moment tables and the pooled regression."""

import math

import numpy as np
import pytest

from roughfut import (
    DegenerateRegressionError,
    InsufficientDataError,
    InvalidParamError,
    estimate_h,
    fbm_series,
    moments,
    regression_points,
)
from oracles import fbm_path


class TestMoments:
    def test_hand_computed_alternating_series(self):
        # log RV = [0, 1, 0, 1]: unit increments at lag 1, zero at lag 2.
        rv = np.exp([0.0, 1.0, 0.0, 1.0])
        table = moments(rv, qs=(0.5, 2.0), deltas=(1, 2))
        assert table.m[0, 0] == pytest.approx(1.0)
        assert table.m[1, 0] == pytest.approx(1.0)
        assert table.m[1, 1] == 0.0
        assert table.n_days == 4

    def test_non_overlapping_counts(self):
        # 8 days, delta 3 -> floor(7/3) = 2 increments: |log r3 - log r0|,
        # |log r6 - log r3|.
        log_rv = np.array([0.0, 9, 9, 2.0, 9, 9, 6.0, 9])
        table = moments(np.exp(log_rv), qs=(1.0,), deltas=(3,))
        assert table.m[0, 0] == pytest.approx((2.0 + 4.0) / 2.0)

    def test_scale_invariance(self):
        # Rescaling RV shifts log RV by a constant, which the increments
        # cancel up to rounding.
        rng = np.random.default_rng(5)
        rv = np.exp(rng.standard_normal(64) * 0.3)
        a = moments(rv, deltas=(1, 2, 5))
        b = moments(7.25 * rv, deltas=(1, 2, 5))
        np.testing.assert_allclose(a.m, b.m, rtol=1e-12)

    def test_default_delta_grid_caps_at_31(self):
        rv = np.exp(np.random.default_rng(0).standard_normal(200) * 0.1)
        table = moments(rv)
        assert table.deltas == tuple(range(1, 32))
        assert table.qs == (0.5, 1.0, 1.5, 2.0, 3.0)

    def test_delta_beyond_half_length_rejected(self):
        rv = np.exp(np.zeros(10) + 1.0)
        with pytest.raises(InsufficientDataError):
            moments(rv, deltas=(6,))

    def test_nonpositive_rv_rejected(self):
        with pytest.raises(InvalidParamError):
            moments([0.1, 0.0, 0.2], deltas=(1,))

    def test_too_short_series(self):
        with pytest.raises(InsufficientDataError):
            moments([0.1], deltas=(1,))


class TestEstimateH:
    def synthetic_table(self, h, qs=(0.5, 1.0, 2.0), deltas=(1, 2, 4, 8),
                        contract="synthetic", scale=1.0):
        # Exact power law m(q, d) = scale^q * d^(qH).
        m = np.array([[scale ** q * d ** (q * h) for d in deltas] for q in qs])
        from roughfut import MomentTable
        return MomentTable(contract=contract, qs=qs, deltas=deltas, m=m,
                           n_days=100)

    def test_exact_power_law_recovers_h(self):
        fit = estimate_h(self.synthetic_table(0.37))
        assert fit.h == pytest.approx(0.37, abs=1e-12)
        for line in fit.lines:
            assert line.h == pytest.approx(0.37, abs=1e-12)
            assert line.r_squared == pytest.approx(1.0, abs=1e-12)
        assert fit.in_range
        assert fit.h_by_q[2.0] == pytest.approx(0.37, abs=1e-12)

    def test_pooling_absorbs_contract_level_shifts(self):
        # Same roughness, different vol-of-vol scale: intercepts differ,
        # the common slope is unaffected.
        t1 = self.synthetic_table(0.21, contract="a", scale=1.0)
        t2 = self.synthetic_table(0.21, contract="b", scale=3.0)
        fit = estimate_h((t1, t2))
        assert fit.h == pytest.approx(0.21, abs=1e-12)
        line = fit.lines[0]
        assert len(line.intercepts) == 2
        assert line.intercepts[0] != pytest.approx(line.intercepts[1])

    def test_unpooled_mode_averages_per_delta(self):
        t1 = self.synthetic_table(0.21, contract="a", scale=1.0)
        t2 = self.synthetic_table(0.21, contract="b", scale=3.0)
        fit = estimate_h((t1, t2), pool=False)
        assert not fit.pooled
        assert fit.h == pytest.approx(0.21, abs=1e-12)
        assert len(fit.lines[0].intercepts) == 1

    def test_fbm_recovers_roughness(self):
        # Log RV modeled directly as fBm sampled daily.
        for h, seed in ((0.1, 3), (0.5, 4)):
            log_rv = fbm_path(h, 4000, seed)[1:] * 0.5
            table = moments(np.exp(log_rv), deltas=tuple(range(1, 21)))
            fit = estimate_h(table)
            assert abs(fit.h - h) < 0.04, (h, fit.h)
            # Per-q estimates agree with the pooled one within a few SE.
            for line in fit.lines:
                assert abs(line.h - fit.h) < 4.0 * line.h_se

    def test_zero_moment_cells_are_dropped(self):
        qs, deltas = (1.0,), (1, 2, 4)
        m = np.array([[2.0 ** (1 * 0.3), 0.0, 8.0 ** 0.3]])[:, [0, 1, 2]]
        m = np.array([[1.0, 0.0, 4.0 ** 0.3]])
        from roughfut import MomentTable
        table = MomentTable(contract="x", qs=qs, deltas=deltas, m=m, n_days=9)
        with pytest.raises(DegenerateRegressionError):
            # Only two nonzero points survive: not enough.
            estimate_h(table)

    def test_constant_series_degenerate(self):
        rv = np.full(40, 1.7)
        table = moments(rv, deltas=(1, 2, 4))
        assert np.all(table.m == 0.0)
        with pytest.raises(DegenerateRegressionError):
            estimate_h(table)

    def test_no_delta_variation_degenerate(self):
        from roughfut import MomentTable
        table = MomentTable(contract="x", qs=(1.0,), deltas=(2, 2, 2),
                            m=np.array([[1.0, 1.0, 1.0]]), n_days=9)
        with pytest.raises(DegenerateRegressionError):
            estimate_h(table)

    def test_mismatched_grids_rejected(self):
        t1 = self.synthetic_table(0.3, deltas=(1, 2, 4, 8))
        t2 = self.synthetic_table(0.3, deltas=(1, 2, 4, 16))
        with pytest.raises(InvalidParamError):
            estimate_h((t1, t2))

    def test_out_of_range_flagged_not_raised(self):
        fit = estimate_h(self.synthetic_table(1.4))
        assert fit.h == pytest.approx(1.4, abs=1e-12)
        assert not fit.in_range


class TestRegressionPoints:
    def test_rows_cover_nonzero_cells(self):
        rv = np.exp([0.0, 1.0, 0.0, 1.0])
        table = moments(rv, qs=(1.0, 2.0), deltas=(1, 2), contract="toy")
        rows = regression_points(table)
        # Lag-2 cells vanish, leaving the two lag-1 cells.
        assert len(rows) == 2
        q, delta, log_delta, log_m, contract = rows[0]
        assert (q, delta, contract) == (1.0, 1, "toy")
        assert log_delta == 0.0
        assert log_m == pytest.approx(0.0)


class TestFbmSeries:
    def test_variance_follows_power_law(self):
        h = 0.3
        paths = np.stack([fbm_series(h, 64, seed) for seed in range(600)])
        for k in (1, 16, 64):
            var = np.var(paths[:, k - 1], ddof=1)
            assert var == pytest.approx(k ** (2 * h), rel=0.2)

    def test_increment_autocovariance(self):
        # Lag-1 autocovariance of unit-variance fGn is 2^(2H-1) - 1.
        h = 0.2
        inc = np.diff(np.stack([fbm_series(h, 200, s) for s in range(400)]),
                      axis=1, prepend=0.0)
        sample = np.mean(inc[:, :-1] * inc[:, 1:])
        assert sample == pytest.approx(2.0 ** (2 * h - 1) - 1.0, abs=0.03)

    def test_scale_and_determinism(self):
        a = fbm_series(0.4, 50, 7)
        b = fbm_series(0.4, 50, 7, scale=2.0)
        np.testing.assert_allclose(2.0 * a, b, rtol=1e-14)
        assert not np.array_equal(a, fbm_series(0.4, 50, 8))

    def test_rejects_bad_inputs(self):
        with pytest.raises(InvalidParamError):
            fbm_series(0.0, 10, 1)
        with pytest.raises(InvalidParamError):
            fbm_series(0.3, 0, 1)
