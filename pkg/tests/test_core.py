import numpy as np
import pytest
from hypothesis import given, strategies as st

from hvacmpc.core import (ComfortSchedule, DeviceParams, PriceSeries, TimeGrid,
                          interval, intervals_disjoint, schedule_bounds)


class TestTimeGrid:
    def test_defaults(self):
        g = TimeGrid()
        assert g.tau_s == 600.0
        assert g.tau_h == pytest.approx(1.0 / 6.0)
        assert g.steps_per_day == 144.0

    def test_hour_of_day(self):
        g = TimeGrid(tau_s=600.0, start=0, steps=300, start_hour=6.0)
        assert g.hour_of_day(0) == 6.0
        assert g.hour_of_day(6) == 7.0
        assert g.hour_of_day(144) == 6.0  # one day later

    def test_invalid(self):
        with pytest.raises(ValueError):
            TimeGrid(tau_s=0.0)
        with pytest.raises(ValueError):
            TimeGrid(steps=0)

    @given(st.integers(0, 10_000), st.floats(0.0, 24.0, allow_nan=False))
    def test_hour_in_range(self, k, start_hour):
        g = TimeGrid(start_hour=start_hour, steps=1)
        assert 0.0 <= g.hour_of_day(k) < 24.0


class TestInterval:
    def test_singleton(self):
        assert interval(0, 1).tolist() == [0]

    def test_r1_window(self):
        # request starting at 107 with length 5 covers 107..111
        assert interval(107, 5).tolist() == [107, 108, 109, 110, 111]

    def test_enumeration(self):
        assert interval(5, 3).tolist() == [5, 6, 7]

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            interval(3, 0)

    @given(st.integers(-100, 100), st.integers(1, 50))
    def test_length(self, k, lam):
        assert interval(k, lam).size == lam

    @given(st.integers(0, 50), st.integers(1, 10), st.integers(0, 50),
           st.integers(1, 10))
    def test_disjoint_matches_sets(self, k1, l1, k2, l2):
        want = not (set(interval(k1, l1)) & set(interval(k2, l2)))
        assert intervals_disjoint(k1, l1, k2, l2) == want


class TestScheduleBounds:
    def test_office_occupied_heating(self):
        assert schedule_bounds("office", 10.0, "heating") == (20.0, 24.0)

    def test_office_night_heating(self):
        assert schedule_bounds("office", 3.0, "heating") == (15.0, 24.0)

    def test_residential_evening_cooling(self):
        assert schedule_bounds("residential", 20.0, "cooling") == (22.0, 24.0)

    def test_residential_wraps_midnight(self):
        assert schedule_bounds("residential", 0.5, "heating") == (20.0, 24.0)
        assert schedule_bounds("residential", 1.5, "heating") == (15.0, 24.0)

    def test_unknown_class(self):
        with pytest.raises(ValueError):
            schedule_bounds("warehouse", 10.0, "heating")

    @given(st.sampled_from(("commercial", "office", "residential")),
           st.floats(0.0, 48.0, allow_nan=False),
           st.sampled_from(("heating", "cooling")))
    def test_ordered_and_periodic(self, zc, hour, mode):
        lo, hi = schedule_bounds(zc, hour, mode)
        assert lo <= hi
        assert schedule_bounds(zc, hour + 24.0, mode) == (lo, hi)


class TestComfortSchedule:
    def test_from_classes(self):
        g = TimeGrid(steps=144)
        s = ComfortSchedule.from_classes(["office", "residential"], g, "heating")
        assert s.lower.shape == (2, 144)
        # office occupied from 8:00 (index 48)
        assert s.lower[0, 47] == 15.0 and s.lower[0, 48] == 20.0

    def test_lead_shift(self):
        g = TimeGrid(steps=144)
        lead = ComfortSchedule.from_classes(["office"], g, "heating",
                                            lead_steps=12)
        # bounds take effect 2 h early: 20 degC from 6:00 (index 36)
        assert lead.lower[0, 35] == 15.0 and lead.lower[0, 36] == 20.0

    def test_invalid(self):
        with pytest.raises(ValueError):
            ComfortSchedule(lower=np.ones((2, 3)), upper=np.zeros((2, 3)))


class TestDeviceParams:
    def _make(self, **kw):
        base = dict(gamma=np.array([2.0]), v_max=np.array([1.0]),
                    alpha_hp_h=0.8, alpha_hp_c=0.8, eta=0.9, e_max=10.0,
                    w_charge_max=2.0, w_discharge_max=2.0,
                    theta_pv=np.array([1.6e-3, -5e-8, -1e-6]))
        base.update(kw)
        return DeviceParams(**base)

    def test_big_m_default(self):
        dev = self._make()
        # big enough for the worst HP lift plus a full-rate charge
        assert dev.big_m >= dev.alpha_hp_h * dev.t0_max_heating + dev.w_charge_max - 1

    def test_eta_range(self):
        with pytest.raises(ValueError):
            self._make(eta=1.0)
        with pytest.raises(ValueError):
            self._make(eta=0.0)

    def test_positive_capacities(self):
        with pytest.raises(ValueError):
            self._make(e_max=0.0)
        with pytest.raises(ValueError):
            self._make(gamma=np.array([-1.0]))


class TestPriceSeries:
    def test_window(self):
        p = PriceSeries(np.arange(10, dtype=float))
        assert p.window(3, 4).tolist() == [3, 4, 5, 6]
        with pytest.raises(IndexError):
            p.window(8, 4)

    def test_nonnegative(self):
        with pytest.raises(ValueError):
            PriceSeries(np.array([0.1, -0.2]))
