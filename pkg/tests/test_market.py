import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from gridprice.errors import DomainError, NoEquilibriumError
from gridprice.market import (LAMBDA_MAX, LAMBDA_MIN, MarketParams, clearing_price, linearize,
                              responsive_demand, supply, total_demand)


def mp(**kw):
    return MarketParams(**kw)


class TestSupply:
    def test_reference_point(self):
        assert supply(mp(p=31, q=917), 10) == 1227

    def test_intercept(self):
        assert supply(mp(p=31, q=917), 0) == 917

    def test_unit_slope(self):
        assert supply(mp(p=1, q=0), 7.5) == 7.5

    def test_negative_price_rejected(self):
        with pytest.raises(DomainError):
            supply(mp(), -0.1)


class TestDemand:
    def test_zero_scale(self):
        assert responsive_demand(mp(D=0), 3.0) == 0

    def test_sqrt_law(self):
        assert responsive_demand(mp(D=100, epsilon=-0.5), 4) == pytest.approx(50, rel=1e-15)

    def test_unit_price(self):
        assert responsive_demand(mp(D=200, epsilon=-0.8), 1) == 200

    def test_below_lambda_min(self):
        with pytest.raises(DomainError):
            responsive_demand(mp(), LAMBDA_MIN / 2)

    def test_total_demand_constant_baseline(self):
        assert total_demand(mp(D=0, baseline=400), 0, 5) == 400

    def test_total_demand_sum(self):
        assert total_demand(mp(D=100, epsilon=-0.5, baseline=400), 0, 4) == pytest.approx(450)

    def test_cyclic_baseline(self):
        m = mp(D=0, baseline=[300, 500])
        assert total_demand(m, 3, 1.0) == 500
        assert total_demand(m, 4, 1.0) == 300

    def test_negative_step_rejected(self):
        with pytest.raises(DomainError):
            total_demand(mp(), -1, 1.0)


class TestParams:
    @pytest.mark.parametrize("kw", [dict(p=0), dict(D=-1), dict(epsilon=-1.0), dict(epsilon=0.0),
                                    dict(T=0), dict(n_consumers=0), dict(baseline=[400, -1]),
                                    dict(baseline=[])])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            MarketParams(**kw)

    def test_household_view(self):
        assert mp(baseline=400, n_consumers=10**6).household_kw(0) == pytest.approx(0.4)


class TestLinearize:
    def test_no_responsive_demand(self):
        pl = linearize(mp(p=31, D=0), 10)
        assert pl.w_dot == 0 and pl.g_p == 31

    def test_derived_slopes(self):
        pl = linearize(mp(p=31, D=100, epsilon=-0.5), 4)
        assert pl.s_dot == 31
        assert pl.w_dot == pytest.approx(-6.25, rel=1e-15)
        assert pl.g_p == pytest.approx(37.25, rel=1e-15)

    def test_supply_intercept_is_q(self):
        assert linearize(mp(p=31, q=917), 10).s0 == 917

    def test_rejects_low_operating_point(self):
        with pytest.raises(DomainError):
            linearize(mp(), 0.001)

    def test_tangent_matches_at_operating_point(self):
        m = mp()
        pl = linearize(m, 20.0)
        assert pl.supply(20.0) == pytest.approx(supply(m, 20.0), rel=1e-14)
        assert pl.responsive_demand(20.0) == pytest.approx(responsive_demand(m, 20.0), rel=1e-14)


class TestClearingPrice:
    def test_linear_case(self):
        assert clearing_price(mp(p=31, q=917, D=0), 1227) == pytest.approx(10, rel=1e-12)

    def test_symmetry_point(self):
        assert clearing_price(mp(p=1, q=0, D=1, epsilon=-0.5), 0) == pytest.approx(1, rel=1e-12)

    def test_golden_against_brentq(self, golden):
        m = mp(p=31, q=917, D=100, epsilon=-0.8)
        oracle = brentq(lambda l: 31 * l + 917 - 400 - 100 * l**-0.8, LAMBDA_MIN, LAMBDA_MAX,
                        xtol=1e-15, rtol=1e-15)
        lam = clearing_price(m, 400)
        assert lam == pytest.approx(oracle, rel=1e-9)
        assert lam == pytest.approx(golden["clearing_price_p31_q917_D100_eps-0.8_b400"], rel=1e-9)

    def test_reference_operating_point(self, golden):
        m = MarketParams()
        lam = clearing_price(m, 400)
        assert lam == pytest.approx(golden["reference_lambda0"], rel=1e-12)
        assert linearize(m, lam).w_dot == pytest.approx(golden["reference_w_dot"], rel=1e-12)

    def test_no_equilibrium(self):
        with pytest.raises(NoEquilibriumError):
            clearing_price(mp(q=1e9), 400)

    def test_negative_baseline(self):
        with pytest.raises(DomainError):
            clearing_price(mp(), -1)


params = st.builds(
    MarketParams,
    p=st.floats(0.5, 100),
    q=st.floats(-500, 2000),
    D=st.floats(1, 1e4),
    epsilon=st.floats(-0.95, -0.05),
)


@given(params, st.floats(1, 2000))
def test_clearing_residual(m, b):
    try:
        lam = clearing_price(m, b)
    except NoEquilibriumError:
        return
    resid = supply(m, lam) - b - responsive_demand(m, lam)
    assert abs(resid) <= 1e-9 * max(b + abs(m.q), 1.0)


@given(params)
def test_monotonicity(m):
    lams = np.geomspace(LAMBDA_MIN, 1e4, 200)
    s = np.array([supply(m, l) for l in lams])
    w = np.array([responsive_demand(m, l) for l in lams])
    assert np.all(np.diff(s) > 0)
    assert np.all(np.diff(w) < 0)


@given(params, st.floats(0.05, 1e3))
def test_linearize_finite_difference(m, lam0):
    h = 1e-6 * lam0
    fd = (responsive_demand(m, lam0 + h) - responsive_demand(m, lam0 - h)) / (2 * h)
    pl = linearize(m, lam0)
    assert pl.w_dot == pytest.approx(fd, rel=1e-4)
    assert pl.s0 == m.q
    assert pl.g_p > 0 and pl.w_dot <= 0
