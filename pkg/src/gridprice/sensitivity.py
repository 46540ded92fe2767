"""Closed-loop sensitivity magnitudes of the pricing loop.

Every sensitivity is a rational function of z evaluated on the unit circle,
z = exp(j*omega*T), with omega in rad/h restricted to [0, pi/T].  The loop
pole sits at z = 1 - 2*eta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .market import LinearizedPlant

DEFAULT_GRID = 1024


@dataclass(frozen=True)
class LoopParams:
    eta: float
    w_dot: float
    s_dot: float
    T: float = 0.5
    rho: float = 0.0
    n_compromised: float = 0.0
    phi: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise DomainError(f"eta must be in (0,1), got {self.eta}")
        if not abs(self.phi) < 1.0:
            raise DomainError(f"phi must be in (-1,1), got {self.phi}")
        if not self.T > 0:
            raise DomainError(f"T must be > 0, got {self.T}")
        if not self.s_dot - self.w_dot > 0:
            raise DomainError("s_dot - w_dot must be > 0")

    @classmethod
    def from_plant(cls, plant: LinearizedPlant, eta: float, T: float, **kw) -> "LoopParams":
        return cls(eta=eta, w_dot=plant.w_dot, s_dot=plant.s_dot, T=T, **kw)

    @property
    def g_p(self) -> float:
        return self.s_dot - self.w_dot

    @property
    def omega_max(self) -> float:
        return math.pi / self.T


@dataclass(frozen=True)
class SensitivityCurve:
    omegas: np.ndarray
    magnitudes: np.ndarray
    label: str = ""


def freqresp(num, den, omega, T):
    """Complex response of num(z)/den(z) (descending powers) at z = e^{j omega T}."""
    z = np.exp(1j * np.asarray(omega, dtype=float) * T)
    return np.polyval(num, z) / np.polyval(den, z)


def _check_band(omega, T):
    w = np.asarray(omega, dtype=float)
    top = math.pi / T
    if np.any(~np.isfinite(w)) or np.any(w < 0) or np.any(w > top * (1 + 1e-12)):
        raise DomainError(f"omega must lie in [0, pi/T] = [0, {top:.6g}]")
    return w


def _mag(num, den, lp: LoopParams, omega):
    w = _check_band(omega, lp.T)
    out = np.abs(freqresp(num, den, w, lp.T))
    return float(out) if out.ndim == 0 else out


def _loop_den(lp: LoopParams):
    return [1.0, -1.0 + 2.0 * lp.eta]


def sens_error_price(lp: LoopParams, omega):
    """|E/d|: supply-demand error per unit additive price attack."""
    gain = -lp.rho * lp.w_dot
    return _mag([gain, -gain], _loop_den(lp), lp, omega)


def sens_price_price(lp: LoopParams, omega):
    """|lambda/d|: price deviation per unit additive price attack."""
    gain = -2.0 * lp.eta * lp.rho * lp.w_dot / lp.g_p
    return _mag([gain], _loop_den(lp), lp, omega)


def sens_error_sensor(lp: LoopParams, omega):
    """|E/n|: reported mismatch per MW of falsified report on each of N meters."""
    gain = -lp.n_compromised
    return _mag([gain, -gain], _loop_den(lp), lp, omega)


def sens_price_sensor(lp: LoopParams, omega):
    gain = lp.n_compromised * 2.0 * lp.eta / lp.g_p
    return _mag([gain], _loop_den(lp), lp, omega)


def _robust(gain, lp: LoopParams, omega):
    num = gain * np.array([1.0, -2.0, 1.0])
    den = np.polymul([1.0, -lp.phi], _loop_den(lp))
    return _mag(num, den, lp, omega)


def sens_error_price_robust(lp: LoopParams, omega):
    """|E/d| with the observer-based compensator in the loop.

    The assumed gain used by the observer cancels out of the loop, so only
    the true disturbance gain -rho*w_dot appears.
    """
    return _robust(-lp.rho * lp.w_dot, lp, omega)


def sens_error_sensor_robust(lp: LoopParams, omega):
    return _robust(-lp.n_compromised, lp, omega)


def cutoff_frequency(phi: float, T: float) -> float:
    """Frequency above which the robust loop amplifies more than the nominal one."""
    if not abs(phi) < 1.0:
        raise DomainError(f"phi must be in (-1,1), got {phi}")
    if not T > 0:
        raise DomainError(f"T must be > 0, got {T}")
    return math.acos((phi + 1.0) / 2.0) / T


def frequency_grid(T: float, grid_size: int = DEFAULT_GRID) -> np.ndarray:
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    return np.linspace(0.0, math.pi / T, grid_size)


def sweep(curve_fn: Callable, lp: LoopParams, grid_size: int = DEFAULT_GRID) -> SensitivityCurve:
    omegas = frequency_grid(lp.T, grid_size)
    mags = np.asarray(curve_fn(lp, omegas), dtype=float)
    return SensitivityCurve(omegas=omegas, magnitudes=mags, label=curve_fn.__name__)


def worst_case_frequency(curve_fn: Callable, lp: LoopParams, grid_size: int = DEFAULT_GRID):
    """Grid argmax of a sensitivity; ties go to the lowest frequency.

    Values within a relative 1e-12 of the maximum count as ties, so a curve
    that is flat up to rounding reports omega = 0.
    """
    curve = sweep(curve_fn, lp, grid_size)
    m = curve.magnitudes
    top = float(np.max(m))
    i = int(np.argmax(m >= top * (1.0 - 1e-12)))
    return float(curve.omegas[i]), float(curve.magnitudes[i])


CURVES = {
    "error-price": sens_error_price,
    "price-price": sens_price_price,
    "error-sensor": sens_error_sensor,
    "price-sensor": sens_price_sensor,
    "error-price-robust": sens_error_price_robust,
    "error-sensor-robust": sens_error_sensor_robust,
}
