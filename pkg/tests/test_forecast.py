import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hvacmpc.forecast import (Ar2Noise, ForecastBundle, ar2_path, gains_forecast,
                              irradiance_forecast, make_bundle,
                              make_bundle_from_errors, temperature_forecast)


class TestAr2Noise:
    def test_unstable_rejected(self):
        with pytest.raises(ValueError):
            Ar2Noise(alpha1=1.5, alpha2=-0.5)   # root on the unit circle
        with pytest.raises(ValueError):
            Ar2Noise(alpha1=2.1, alpha2=-1.0)

    def test_sigma_zero_all_zeros(self):
        noise = Ar2Noise(sigma=0.0)
        d = ar2_path(noise, 20, np.random.default_rng(0))
        assert np.all(d == 0.0)

    def test_white_noise_variance(self):
        noise = Ar2Noise(alpha1=0.0, alpha2=0.0, sigma=1.0)
        d = ar2_path(noise, 200_000, np.random.default_rng(1))
        assert d.var() == pytest.approx(1.0, rel=0.02)

    def test_determinism(self):
        noise = Ar2Noise()
        a = ar2_path(noise, 72, np.random.default_rng(7))
        b = ar2_path(noise, 72, np.random.default_rng(7))
        assert np.array_equal(a, b)

    def test_calibrated_envelope(self):
        # ~3 degC maximum error over a 12 h horizon at the 90th percentile
        noise = Ar2Noise()
        maxes = [np.abs(ar2_path(noise, 72, np.random.default_rng(s))).max()
                 for s in range(400)]
        q90 = np.quantile(maxes, 0.9)
        assert 2.5 < q90 < 3.5


class TestForecastOperators:
    def test_temperature_exact_at_now(self):
        t = np.array([5.0, 6.0, 7.0])
        d = np.array([3.0, 3.0, 3.0])
        out = temperature_forecast(t, d, k=10, lam=3)
        assert out[0] == t[0]
        assert out[-1] == pytest.approx(t[-1] + 3.0 * 2.0 / 3.0)

    def test_temperature_zero_error(self):
        t = np.linspace(0, 5, 8)
        assert np.array_equal(temperature_forecast(t, np.zeros(8), 0, 8), t)

    def test_irradiance_night(self):
        i = np.zeros(5)
        out = irradiance_forecast(i, np.full(5, 4.0), 0, 5)
        assert np.all(out == 0.0)

    def test_irradiance_clamped(self):
        i = np.full(4, 100.0)
        out = irradiance_forecast(i, np.full(4, -2.0), 0, 4)
        assert np.all(out >= 0.0)
        assert out[0] == 100.0

    def test_gains_saturate(self):
        g = np.array([1.0, 1.0])
        out = gains_forecast(g, np.array([-4.0, -4.0]), 0, 2)
        assert out[0] == 1.0 and out[1] == 0.0

    @given(st.integers(2, 40), st.integers(0, 3))
    @settings(max_examples=25, deadline=None)
    def test_exact_at_now_property(self, lam, seed):
        rng = np.random.default_rng(seed)
        t = rng.normal(10, 5, lam)
        i = rng.uniform(0, 800, lam)
        g = rng.uniform(0, 2, (lam, 2))
        fb = make_bundle(t, i, g, 0, lam, rng=rng)
        assert fb.t_ambient[0] == t[0]
        assert fb.irradiance[0] == i[0]
        assert np.array_equal(fb.gains[0], g[0])

    def test_error_grows_with_lead(self):
        rng_master = np.random.default_rng(0)
        lam = 72
        t = np.zeros(lam)
        errs = np.zeros(lam)
        for _ in range(300):
            d = ar2_path(Ar2Noise(), lam, rng_master)
            errs += np.abs(temperature_forecast(t, d, 0, lam))
        errs /= 300
        # mean absolute error at the horizon end well above the first quarter
        assert errs[-1] > 2.0 * errs[lam // 4]


class TestBundle:
    def test_exo_matrix_layout(self):
        fb = ForecastBundle(t_ambient=np.array([2.0]), irradiance=np.array([100.0]),
                            gains=np.array([[0.5, 0.7]]))
        row = fb.exo_matrix()[0]
        assert row.tolist() == [2.0, 100.0, 10000.0, 200.0, 0.5, 0.7]

    def test_truth_when_no_rng(self):
        t, i = np.arange(5.0), np.arange(5.0) * 10
        g = np.ones((5, 1))
        fb = make_bundle(t, i, g, 0, 5, rng=None)
        assert np.array_equal(fb.t_ambient, t)
        assert np.array_equal(fb.irradiance, i)

    def test_sources_selectable(self):
        t, i = np.full(6, 10.0), np.full(6, 100.0)
        g = np.ones((6, 1))
        fb = make_bundle(t, i, g, 0, 6, rng=np.random.default_rng(3),
                         sources=("temp",))
        assert not np.array_equal(fb.t_ambient, t)
        assert np.array_equal(fb.irradiance, i)
        assert np.array_equal(fb.gains, g)

    def test_from_errors_exact_at_now(self):
        lam = 6
        t, i = np.full(lam, 10.0), np.full(lam, 100.0)
        g = np.ones((lam, 1))
        d = ar2_path(Ar2Noise(), lam, np.random.default_rng(5))
        fb = make_bundle_from_errors(t, i, g, 0, lam,
                                     {"temp": d, "irr": d, "gains": d})
        assert fb.t_ambient[0] == t[0]
        assert fb.irradiance[0] == i[0]
        assert np.array_equal(fb.gains[0], g[0])

    def test_from_errors_refines_with_shrinking_lead(self):
        # slices of one long path: the forecast error of a fixed instant
        # shrinks geometrically as the window slides toward it
        lam, n = 8, 5
        t = np.zeros(n + lam)
        d = ar2_path(Ar2Noise(), n + lam, np.random.default_rng(11))
        target = lam - 1   # fixed absolute instant, inside every window
        errs = []
        for k in range(n):
            fb = make_bundle_from_errors(t[k:k + lam], np.zeros(lam),
                                         np.zeros((lam, 1)), k, lam,
                                         {"temp": d[k:k + lam]})
            errs.append(abs(fb.t_ambient[target - k]))
        expected = [abs(d[target]) * (target - k) / lam for k in range(n)]
        assert errs == pytest.approx(expected)
        assert errs == sorted(errs, reverse=True) or abs(d[target]) == 0.0

    def test_from_errors_empty_is_truth(self):
        t, i = np.arange(4.0), np.arange(4.0) * 10
        g = np.ones((4, 1))
        fb = make_bundle_from_errors(t, i, g, 0, 4, {})
        assert np.array_equal(fb.t_ambient, t)
        assert np.array_equal(fb.irradiance, i)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            ForecastBundle(t_ambient=np.zeros(2), irradiance=np.array([-1.0, 0.0]),
                           gains=np.zeros((2, 1)))
