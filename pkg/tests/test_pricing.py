import numpy as np
import pytest

from roughfut import (
    ForwardVarianceCurve,
    FuturesCurve,
    GridMismatchError,
    InvalidParamError,
    ModelSpec,
    OutOfBandError,
    RBergomiParams,
    SpotParams,
    TimeGrid,
    VanillaSpec,
    atm_term_structure,
    black_price,
    futures_price,
    implied_vol,
    mc_vanilla,
    model_smile,
    simulate,
    smile_from_batch,
)
from roughfut.pricing import invert_or_clamp, VOL_HI, VOL_LO

from oracles import black_call_quadrature

FLAT100 = FuturesCurve.flat(100.0)


class TestFuturesMap:
    def test_spot_one_recovers_initial_curve(self):
        for a in (0.0, 0.5, 2.0):
            assert futures_price(1.0, 0.2, 1.0, a, FLAT100) == pytest.approx(100.0)

    def test_zero_mean_reversion_is_proportional(self):
        assert futures_price(0.9, 0.0, 1.0, 0.0, FLAT100) == pytest.approx(90.0)

    def test_reference_value(self):
        # 100 * (1 - 0.1 * exp(-0.5)), evaluated independently
        got = futures_price(0.9, 0.0, 1.0, 0.5, FLAT100)
        assert got == pytest.approx(93.93469340287367, abs=1e-12)

    def test_vectorized_over_spot(self):
        s = np.array([0.0, 0.9, 1.0, 1.3])
        f = futures_price(s, 0.0, 1.0, 0.5, FLAT100)
        assert f.shape == s.shape
        assert f[2] == pytest.approx(100.0)

    def test_no_clamping_below_zero(self):
        # s = 0 with weak damping can price below zero; left untouched
        f = futures_price(-0.5, 0.0, 1.0, 0.0, FLAT100)
        assert f == pytest.approx(-50.0)

    def test_maturity_order_enforced(self):
        with pytest.raises(InvalidParamError):
            futures_price(1.0, 2.0, 1.0, 0.5, FLAT100)


class TestFuturesCurve:
    def test_log_linear_interpolation(self):
        curve = FuturesCurve(pillars=((0.5, 100.0), (1.0, 121.0)))
        assert curve(0.75) == pytest.approx(110.0, rel=1e-12)
        assert curve(0.5) == pytest.approx(100.0, rel=1e-12)
        assert curve(2.0) == pytest.approx(121.0, rel=1e-12)

    def test_validation(self):
        with pytest.raises(InvalidParamError):
            FuturesCurve(pillars=())
        with pytest.raises(InvalidParamError):
            FuturesCurve(pillars=((1.0, 100.0), (0.5, 90.0)))
        with pytest.raises(InvalidParamError):
            FuturesCurve(pillars=((1.0, -100.0),))


class TestBlack:
    def test_against_quadrature_oracle(self):
        for f, k, t, sigma in [(100.0, 95.0, 0.5, 0.35), (50.0, 60.0, 1.0, 0.2),
                               (100.0, 100.0, 0.25, 0.5)]:
            oracle = black_call_quadrature(f, k, t, sigma)
            assert black_price(f, k, t, sigma) == pytest.approx(oracle, abs=1e-8)

    def test_put_call_parity(self):
        c = black_price(100.0, 90.0, 0.5, 0.3, is_call=True)
        p = black_price(100.0, 90.0, 0.5, 0.3, is_call=False)
        assert c - p == pytest.approx(10.0, abs=1e-10)

    def test_zero_vol_returns_intrinsic(self):
        assert black_price(100.0, 95.0, 0.5, 0.0) == pytest.approx(5.0, abs=1e-12)
        assert black_price(100.0, 105.0, 0.5, 0.0) == 0.0
        assert black_price(100.0, 105.0, 0.5, 0.0, is_call=False) == \
            pytest.approx(5.0, abs=1e-12)
        assert black_price(100.0, 95.0, 0.5, 1e-15) == pytest.approx(5.0, abs=1e-12)

    def test_roundtrip(self):
        for sigma in (0.05, 0.2, 0.35, 0.8, 2.0):
            price = black_price(100.0, 95.0, 0.5, sigma)
            assert implied_vol(price, 100.0, 95.0, 0.5) == \
                pytest.approx(sigma, abs=1e-8)

    def test_monotone_in_strike(self):
        prices = [black_price(100.0, k, 0.5, 0.3) for k in (80, 90, 100, 110)]
        assert all(a > b for a, b in zip(prices, prices[1:]))

    def test_out_of_band_rejected(self):
        with pytest.raises(OutOfBandError):
            implied_vol(101.0, 100.0, 95.0, 0.5)           # above forward
        with pytest.raises(OutOfBandError):
            implied_vol(4.0, 100.0, 95.0, 0.5)             # below intrinsic
        with pytest.raises(OutOfBandError):
            implied_vol(5.0, 100.0, 95.0, 0.5)             # band is open
        with pytest.raises(OutOfBandError):
            implied_vol(0.0, 100.0, 200.0, 0.25)           # zero OTM price

    def test_tiny_but_positive_price_still_inverts(self):
        vol = implied_vol(1e-30, 100.0, 200.0, 0.25)
        assert VOL_LO < vol < 0.2
        assert black_price(100.0, 200.0, 0.25, vol) == pytest.approx(1e-30,
                                                                     rel=1e-3)

    def test_invert_or_clamp(self):
        vol, ok = invert_or_clamp(0.0, 100.0, 200.0, 0.25, True)
        assert (vol, ok) == (VOL_LO, False)
        vol, ok = invert_or_clamp(99.9999, 100.0, 100.0, 0.25, True)
        assert (vol, ok) == (VOL_HI, False)
        vol, ok = invert_or_clamp(black_price(100, 95, 0.5, 0.35), 100, 95,
                                  0.5, True)
        assert ok and vol == pytest.approx(0.35, abs=1e-8)

    def test_input_validation(self):
        with pytest.raises(InvalidParamError):
            black_price(-100.0, 95.0, 0.5, 0.3)
        with pytest.raises(InvalidParamError):
            black_price(100.0, 95.0, -0.5, 0.3)
        with pytest.raises(InvalidParamError):
            black_price(100.0, 95.0, 0.5, -0.3)


def _small_batch(n_paths=20_000, horizon=0.25, steps_per_year=200, seed=70):
    model = ModelSpec(
        variance=RBergomiParams(h=0.3, eta=1.2,
                                xi0=ForwardVarianceCurve.flat(0.04)),
        spot=SpotParams(mean_reversion=0.5, corr=-0.3),
        futures=FLAT100,
    )
    grid = TimeGrid.regular(horizon, steps_per_year)
    return simulate(model, grid, n_paths, seed)["single"]


class TestMcVanilla:
    def test_put_call_parity_exact_on_shared_paths(self):
        batch = _small_batch(n_paths=4000)
        call = VanillaSpec(t_opt=0.25, t_fut=0.5, strike=95.0, is_call=True)
        put = VanillaSpec(t_opt=0.25, t_fut=0.5, strike=95.0, is_call=False)
        c, _ = mc_vanilla(batch, call, 0.5, FLAT100)
        p, _ = mc_vanilla(batch, put, 0.5, FLAT100)
        k = batch.grid.index_of(0.25)
        f = futures_price(batch.s[:, k], 0.25, 0.5, 0.5, FLAT100)
        assert c - p == pytest.approx(float(np.mean(f)) - 95.0, abs=1e-9)

    def test_martingale_futures_mean(self):
        batch = _small_batch()
        k = batch.grid.index_of(0.25)
        f = futures_price(batch.s[:, k], 0.25, 0.5, 0.5, FLAT100)
        se = np.std(f, ddof=1) / np.sqrt(batch.n_paths)
        assert abs(np.mean(f) - 100.0) < 4.0 * se

    def test_far_strike_price_vanishes(self):
        batch = _small_batch(n_paths=2000)
        spec = VanillaSpec(t_opt=0.25, t_fut=0.5, strike=1e6, is_call=True)
        price, stderr = mc_vanilla(batch, spec, 0.5, FLAT100)
        assert price == 0.0 and stderr == 0.0

    def test_grid_mismatch(self):
        batch = _small_batch(n_paths=500)
        spec = VanillaSpec(t_opt=0.123, t_fut=0.5, strike=100.0)
        with pytest.raises(GridMismatchError):
            mc_vanilla(batch, spec, 0.5, FLAT100)

    def test_control_variate_reduces_stderr(self):
        batch = _small_batch(n_paths=10_000)
        spec = VanillaSpec(t_opt=0.25, t_fut=0.5, strike=100.0)
        plain, se_plain = mc_vanilla(batch, spec, 0.5, FLAT100)
        cv, se_cv = mc_vanilla(batch, spec, 0.5, FLAT100, control_variate=True)
        assert se_cv < se_plain
        assert abs(cv - plain) < 4.0 * se_plain

    def test_vanilla_spec_validation(self):
        with pytest.raises(InvalidParamError):
            VanillaSpec(t_opt=0.5, t_fut=0.25, strike=100.0)
        with pytest.raises(InvalidParamError):
            VanillaSpec(t_opt=0.25, t_fut=0.5, strike=0.0)


class TestModelSmile:
    def test_flat_lognormal_smile(self):
        # eta = 0 and a = 0 make the futures exactly lognormal with vol 0.2
        model = ModelSpec(
            variance=RBergomiParams(h=0.5, eta=0.0,
                                    xi0=ForwardVarianceCurve.flat(0.04)),
            spot=SpotParams(mean_reversion=0.0, corr=-0.3),
            futures=FLAT100,
        )
        strikes = (90.0, 100.0, 110.0)
        specs = [VanillaSpec(t_opt=0.25, t_fut=0.5, strike=k) for k in strikes]
        points = model_smile(model, specs, n_paths=40_000, seed=12,
                             steps_per_year=300)
        assert [p.strike for p in points] == list(strikes)
        for p in points:
            assert p.inversion_ok
            assert p.model_vol == pytest.approx(0.2, abs=0.006)

    def test_empty_spec_list(self):
        model = ModelSpec(
            variance=RBergomiParams(h=0.5, eta=0.0,
                                    xi0=ForwardVarianceCurve.flat(0.04)),
            spot=SpotParams(mean_reversion=0.0, corr=-0.3),
            futures=FLAT100,
        )
        with pytest.raises(InvalidParamError):
            model_smile(model, [], n_paths=100, seed=0)

    def test_mixed_expiries_rejected(self):
        model = ModelSpec(
            variance=RBergomiParams(h=0.5, eta=0.0,
                                    xi0=ForwardVarianceCurve.flat(0.04)),
            spot=SpotParams(mean_reversion=0.0, corr=-0.3),
            futures=FLAT100,
        )
        specs = [VanillaSpec(t_opt=0.25, t_fut=0.5, strike=100.0),
                 VanillaSpec(t_opt=0.5, t_fut=0.5, strike=100.0)]
        with pytest.raises(InvalidParamError):
            model_smile(model, specs, n_paths=100, seed=0)

    def test_out_of_band_points_flagged_not_dropped(self):
        batch = _small_batch(n_paths=300)
        specs = [VanillaSpec(t_opt=0.25, t_fut=0.5, strike=k)
                 for k in (100.0, 1e5)]
        points = smile_from_batch(batch, specs, 0.5, FLAT100)
        assert len(points) == 2
        assert points[0].inversion_ok
        assert not points[1].inversion_ok       # zero MC price, no vol exists
        assert points[1].model_vol == VOL_LO


class TestSamuelsonProfile:
    def test_deterministic_variance_term_structure(self):
        model = ModelSpec(
            variance=RBergomiParams(h=0.5, eta=0.0,
                                    xi0=ForwardVarianceCurve.flat(0.04)),
            spot=SpotParams(mean_reversion=0.0, corr=-0.3),
            futures=FLAT100,
        )
        out = atm_term_structure(model, t_fut=0.5, t_opts=[0.25, 0.5],
                                 a_values=[0.0, 2.0], n_paths=8000, seed=31,
                                 steps_per_year=200)
        assert set(out) == {0.0, 2.0}
        flat_profile = [row[1] for row in out[0.0]]
        steep_profile = [row[1] for row in out[2.0]]
        # a = 0: flat at 0.2 within MC noise
        assert flat_profile[0] == pytest.approx(flat_profile[1], abs=0.01)
        assert flat_profile[0] == pytest.approx(0.2, abs=0.01)
        # a = 2: damped early vol, rising toward the futures maturity
        assert steep_profile[0] < steep_profile[1]
        # for fixed t_opt, vol is non-increasing in a
        assert steep_profile[0] < flat_profile[0]
        assert steep_profile[1] < flat_profile[1]

    def test_expiry_beyond_futures_rejected(self):
        model = ModelSpec(
            variance=RBergomiParams(h=0.5, eta=0.0,
                                    xi0=ForwardVarianceCurve.flat(0.04)),
            spot=SpotParams(mean_reversion=0.0, corr=-0.3),
            futures=FLAT100,
        )
        with pytest.raises(InvalidParamError):
            atm_term_structure(model, t_fut=0.5, t_opts=[0.75],
                               a_values=[0.0], n_paths=100, seed=0)
