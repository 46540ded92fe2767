import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gridprice.attacks import (AttackSignal, AttackSpec, attacked_price, sensor_report_shift,
                               victim_demand_shift)
from gridprice.market import LAMBDA_MIN, LinearizedPlant, MarketParams
from gridprice.simulation import Scenario, run

PLANT = LinearizedPlant(lambda0=10.0, s_dot=31.0, w_dot=-10.0, s0=917.0, w0=500.0)


def sine(a=1.0, w=1.0, phase=0.0):
    return AttackSignal(kind="sinusoid", amplitude=a, omega=w, phase=phase)


class TestAttackedPrice:
    def test_scaling(self):
        spec = AttackSpec(shape="scaling", gamma=0.95, start=0)
        assert attacked_price(spec, 0, [20.0]) == pytest.approx(19.0)

    def test_delay_prehistory_replays_first_price(self):
        spec = AttackSpec(shape="delay", tau=8, start=0)
        assert attacked_price(spec, 3, [10.0, 11.0, 12.0, 13.0]) == 10.0

    def test_delay_reads_history(self):
        spec = AttackSpec(shape="delay", tau=2, start=0)
        assert attacked_price(spec, 3, [10.0, 11.0, 12.0, 13.0]) == 11.0

    def test_sine_at_nyquist_vanishes(self):
        spec = AttackSpec(signal=sine(1.0, 2 * math.pi), start=0)
        assert attacked_price(spec, 1, [7.0, 7.0], T=0.5) == pytest.approx(7.0, abs=1e-12)

    def test_clamped(self):
        spec = AttackSpec(signal=AttackSignal(kind="constant", amplitude=-100.0), start=0)
        assert attacked_price(spec, 0, [5.0]) == LAMBDA_MIN

    def test_series_indexed_from_start(self):
        spec = AttackSpec(signal=AttackSignal(kind="series", values=[1.0, 2.0]), start=5)
        hist = [10.0] * 8
        assert [attacked_price(spec, k, hist) for k in range(4, 8)] == [10.0, 11.0, 12.0, 10.0]

    @given(st.integers(0, 30), st.integers(0, 10), st.integers(0, 10))
    def test_identity_outside_window(self, k, start, width):
        spec = AttackSpec(shape="scaling", gamma=1.7, start=start, end=start + width)
        hist = [3.0 + 0.1 * i for i in range(31)]
        out = attacked_price(spec, k, hist)
        if not spec.active(k):
            assert out == hist[k]

    def test_sensor_channel_leaves_price(self):
        spec = AttackSpec(channel="sensor", signal=sine(), n_compromised=10, start=0)
        assert attacked_price(spec, 0, [4.0]) == 4.0


class TestValidation:
    @pytest.mark.parametrize("kw", [
        dict(channel="radio"), dict(shape="jam"), dict(rho=1.5), dict(rho=-0.1),
        dict(n_compromised=-1), dict(shape="scaling", gamma=0.0), dict(shape="delay", tau=0),
        dict(channel="sensor", shape="scaling"), dict(start=-1), dict(start=5, end=4),
    ])
    def test_spec_invalid(self, kw):
        with pytest.raises(ValueError):
            AttackSpec(**kw)

    @pytest.mark.parametrize("kw", [
        dict(kind="chirp"), dict(kind="sinusoid", amplitude=-1),
        dict(kind="sinusoid", omega=-1), dict(kind="series", values=[1.0, math.nan]),
    ])
    def test_signal_invalid(self, kw):
        with pytest.raises(ValueError):
            AttackSignal(**kw)

    def test_band_limit(self):
        sine(w=2 * math.pi).check_band(0.5)
        with pytest.raises(ValueError):
            sine(w=2 * math.pi + 0.01).check_band(0.5)


class TestVictimShift:
    def test_no_victims(self):
        assert victim_demand_shift(PLANT, AttackSpec(rho=0.0), 1.0) == 0

    def test_product(self):
        assert victim_demand_shift(PLANT, AttackSpec(rho=0.5), 1.0) == pytest.approx(-5.0)

    def test_zero_attack(self):
        assert victim_demand_shift(PLANT, AttackSpec(rho=1.0), 0.0) == 0

    def test_wrong_channel(self):
        with pytest.raises(ValueError):
            victim_demand_shift(PLANT, AttackSpec(channel="sensor"), 1.0)

    def test_large_attack_warns(self):
        with pytest.warns(UserWarning):
            victim_demand_shift(PLANT, AttackSpec(rho=0.5), 3.0)

    def test_small_attack_silent(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            victim_demand_shift(PLANT, AttackSpec(rho=0.5), 1.0)

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(-1, 1))
    def test_linear_in_rho(self, r1, r2, d):
        a = victim_demand_shift(PLANT, AttackSpec(rho=r1), d)
        b = victim_demand_shift(PLANT, AttackSpec(rho=r2), d)
        assert a * r2 == pytest.approx(b * r1, abs=1e-12)


class TestSensorShift:
    def const(self, n, v):
        return AttackSpec(channel="sensor", n_compromised=n, start=0,
                          signal=AttackSignal(kind="constant", amplitude=v))

    def test_no_meters(self):
        assert sensor_report_shift(self.const(0, 0.2), 0) == 0

    def test_full_compromise_peak(self):
        assert sensor_report_shift(self.const(10**6, 0.2), 0) == pytest.approx(200.0)

    def test_unit_conversion(self):
        assert sensor_report_shift(self.const(1, 1.0), 0) == pytest.approx(0.001)

    def test_wrong_channel(self):
        with pytest.raises(ValueError):
            sensor_report_shift(AttackSpec(), 0)

    def test_inactive(self):
        spec = AttackSpec(channel="sensor", n_compromised=5, start=10,
                          signal=AttackSignal(kind="constant", amplitude=1.0))
        assert sensor_report_shift(spec, 9) == 0.0

    @given(st.integers(0, 10**6), st.floats(-1, 1))
    def test_linear_in_n(self, n, v):
        assert sensor_report_shift(self.const(n, v), 0) == pytest.approx(n * v / 1000.0)


@pytest.mark.parametrize("plant_mode", ["linearized", "nonlinear"])
@pytest.mark.parametrize("legacy", [
    AttackSpec(shape="scaling", gamma=0.95, rho=0.5, start=48),
    AttackSpec(shape="delay", tau=8, rho=0.5, start=48),
])
def test_legacy_attacks_are_additive(plant_mode, legacy):
    """Replaying the implied offset d_k as an additive series reproduces the run."""
    base = Scenario(market=MarketParams(baseline=[380.0, 400.0, 430.0, 410.0]),
                    plant_mode=plant_mode, horizon=120)
    tr = run(base.with_attack(legacy))
    d = (tr["lambda_victim"] - tr["lambda"])[legacy.start:]
    series = AttackSpec(signal=AttackSignal(kind="series", values=d), rho=0.5, start=legacy.start)
    tr2 = run(base.with_attack(series))
    np.testing.assert_allclose(tr2.e, tr.e, rtol=0, atol=1e-9)
    np.testing.assert_allclose(tr2.price, tr.price, rtol=0, atol=1e-12)
    if legacy.shape == "scaling":
        np.testing.assert_allclose(d, (0.95 - 1.0) * tr.price[legacy.start:], rtol=1e-12)
