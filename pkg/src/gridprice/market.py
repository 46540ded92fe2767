"""Aggregate electricity market: linear supply, CEO price-responsive demand.

Units are fixed throughout the package: power in MW, prices in $/MWh,
time in hours.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError, NoEquilibriumError

LAMBDA_MIN = 0.01
LAMBDA_MAX = 1e6
BISECTION_ITERS = 200


@dataclass(frozen=True)
class MarketParams:
    """Supply/demand parameters plus the price-independent baseline load.

    ``baseline`` is indexed cyclically, so a one-day profile can drive a
    week-long run.
    """

    p: float = 31.0
    q: float = 917.0
    D: float = 5000.0
    epsilon: float = -0.5
    T: float = 0.5
    baseline: tuple[float, ...] = (400.0,)
    n_consumers: int = 1_000_000

    def __post_init__(self):
        if isinstance(self.baseline, (int, float)):
            object.__setattr__(self, "baseline", (float(self.baseline),))
        else:
            object.__setattr__(self, "baseline", tuple(float(b) for b in self.baseline))
        if not self.p > 0:
            raise DomainError(f"p must be > 0, got {self.p}")
        if not self.D >= 0:
            raise DomainError(f"D must be >= 0, got {self.D}")
        if not -1.0 < self.epsilon < 0.0:
            raise DomainError(f"epsilon must be in (-1, 0), got {self.epsilon}")
        if not self.T > 0:
            raise DomainError(f"T must be > 0, got {self.T}")
        if self.n_consumers < 1:
            raise DomainError(f"n_consumers must be >= 1, got {self.n_consumers}")
        if not self.baseline:
            raise DomainError("baseline must contain at least one value")
        if not all(math.isfinite(b) and b > 0 for b in self.baseline):
            raise DomainError("every baseline entry must be finite and > 0")

    def baseline_at(self, k: int) -> float:
        return self.baseline[k % len(self.baseline)]

    def household_kw(self, k: int) -> float:
        """Per-household baseline in kW at step ``k``."""
        return self.baseline_at(k) * 1000.0 / self.n_consumers


@dataclass(frozen=True)
class LinearizedPlant:
    """First-order Taylor model of supply and demand around ``lambda0``."""

    lambda0: float
    s_dot: float
    w_dot: float
    s0: float
    w0: float
    g_p: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "g_p", self.s_dot - self.w_dot)
        if not self.lambda0 > 0:
            raise DomainError(f"lambda0 must be > 0, got {self.lambda0}")
        if self.w_dot > 0:
            raise DomainError(f"w_dot must be <= 0, got {self.w_dot}")
        if not self.g_p > 0:
            raise DomainError(f"g_p must be > 0, got {self.g_p}")

    def supply(self, lam: float) -> float:
        return self.s0 + self.s_dot * lam

    def responsive_demand(self, lam: float) -> float:
        return self.w0 + self.w_dot * lam


def supply(params: MarketParams, lam: float) -> float:
    if lam < 0:
        raise DomainError(f"price must be >= 0, got {lam}")
    return params.p * lam + params.q


def responsive_demand(params: MarketParams, lam: float) -> float:
    if not lam >= LAMBDA_MIN:
        raise DomainError(f"price {lam} below lambda_min={LAMBDA_MIN}")
    return params.D * lam**params.epsilon


def total_demand(params: MarketParams, k: int, lam: float) -> float:
    if k < 0:
        raise DomainError(f"step index must be >= 0, got {k}")
    return params.baseline_at(k) + responsive_demand(params, lam)


def linearize(params: MarketParams, lambda0: float) -> LinearizedPlant:
    if not lambda0 >= LAMBDA_MIN:
        raise DomainError(f"operating price {lambda0} below lambda_min={LAMBDA_MIN}")
    s_dot = params.p
    w_dot = params.D * params.epsilon * lambda0 ** (params.epsilon - 1.0)
    s0 = params.q  # s(lambda0) - lambda0*s_dot, exact for affine supply
    w0 = responsive_demand(params, lambda0) - lambda0 * w_dot
    return LinearizedPlant(lambda0=lambda0, s_dot=s_dot, w_dot=w_dot, s0=s0, w0=w0)


def clearing_price(params: MarketParams, b: float) -> float:
    """Price at which supply meets ``b`` plus the responsive demand.

    Excess supply is strictly increasing in price, so plain bisection on
    ``[LAMBDA_MIN, LAMBDA_MAX]`` finds the unique root.
    """
    if not b >= 0:
        raise DomainError(f"baseline must be >= 0, got {b}")

    def excess(lam):
        return supply(params, lam) - b - responsive_demand(params, lam)

    tol = 1e-9 * max(b + abs(params.q), 1.0)
    lo, hi = LAMBDA_MIN, LAMBDA_MAX
    f_lo, f_hi = excess(lo), excess(hi)
    if f_lo > 0 or f_hi < 0:
        raise NoEquilibriumError(
            f"no sign change of s - d on [{lo}, {hi}] for b={b} "
            f"(excess {f_lo:.6g} .. {f_hi:.6g})"
        )
    if f_lo == 0:
        return lo
    mid = lo
    for _ in range(BISECTION_ITERS):
        mid = 0.5 * (lo + hi)
        f_mid = excess(mid)
        if abs(f_mid) <= tol and (hi - lo) <= 1e-12 * mid:
            break
        if f_mid < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * math.ulp(mid):
            break
    if abs(excess(mid)) > tol:
        raise NoEquilibriumError(f"bisection did not converge for b={b}")
    return mid
