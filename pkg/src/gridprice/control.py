"""Price controller, disturbance observer and meter-side low-pass filter."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SignalError
from .market import LAMBDA_MIN


def _finite(name, *values):
    for v in values:
        if not math.isfinite(v):
            raise SignalError(f"non-finite {name}: {v}")


@dataclass
class PriceController:
    """Integral price update lambda_k = lambda_{k-1} - (2 eta / G_p) e_obs.

    ``e_obs`` is the mismatch reported for the previous period, which is
    how the one-step observation delay enters the loop.  ``lambda_prev``
    holds the nominal (uncompensated) price so the robust correction is
    applied on top of it rather than integrated.
    """

    eta: float
    g_p: float
    lambda_prev: float
    clamp_count: int = 0
    last_price: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise DomainError(f"eta must be in (0,1), got {self.eta}")
        if not self.g_p > 0:
            raise DomainError(f"g_p must be > 0, got {self.g_p}")
        if self.lambda_prev < LAMBDA_MIN:
            raise DomainError(f"lambda_prev must be >= {LAMBDA_MIN}")
        self.last_price = self.lambda_prev

    @property
    def gain(self) -> float:
        return 2.0 * self.eta / self.g_p

    def _clamp(self, lam):
        if lam < LAMBDA_MIN:
            self.clamp_count += 1
            return LAMBDA_MIN, True
        return lam, False

    def step(self, e_obs: float) -> float:
        _finite("e_obs", e_obs)
        lam, _ = self._clamp(self.lambda_prev - self.gain * e_obs)
        self.lambda_prev = lam
        self.last_price = lam
        return lam

    def robust_step(self, e_obs: float, scaled_dhat: float) -> float:
        """Nominal update minus the add-on correction G_p^{-1} * (gamma_hat * d_hat)."""
        _finite("scaled d_hat", scaled_dhat)
        nominal = self.step(e_obs)
        lam, _ = self._clamp(nominal - scaled_dhat / self.g_p)
        self.last_price = lam
        return lam


class DisturbanceObserver:
    """Unknown-input estimator for x_{j+1} = g_p*u_j + gamma*d_j.

    Measurements and inputs are paired as in the state equation: the
    measurement handed to :meth:`estimate` at step k is x_k, produced by the
    input u_{k-1}.  With ``lag=1`` the estimate uses x_k directly; with
    ``lag=2`` it uses x_{k-1} and keeps two interleaved internal states,
    which is the delayed variant for an operator that only holds older data.
    In both cases gamma_hat*d_hat follows gamma*d through
    (1-phi)/(z^lag - phi), independently of the true gamma.
    """

    def __init__(self, phi: float, gamma_hat: float, g_p: float, lag: int = 1):
        if not abs(phi) < 1.0:
            raise DomainError(f"phi must be in (-1,1), got {phi}")
        if gamma_hat == 0 or not math.isfinite(gamma_hat):
            raise DomainError("gamma_hat must be finite and non-zero")
        if lag not in (1, 2):
            raise DomainError(f"lag must be 1 or 2, got {lag}")
        self.phi = phi
        self.gamma_hat = gamma_hat
        self.g_p = g_p
        self.lag = lag
        self.k_gain = (1.0 - phi) / gamma_hat
        self._x = deque([0.0] * lag, maxlen=lag)
        self._z = deque([0.0] * lag, maxlen=lag)
        self.d_hat = 0.0

    @property
    def scaled(self) -> float:
        return self.gamma_hat * self.d_hat

    def estimate(self, x: float) -> float:
        _finite("measurement", x)
        self._x.append(x)
        self.d_hat = self.k_gain * self._x[0] - self._z[0]
        return self.d_hat

    def update(self, u: float, offset: float = 0.0) -> None:
        """Advance with the input applied this step.

        ``offset`` carries any known, non-input part of the predicted next
        measurement (e.g. a forecast baseline change), so that
        ``g_p*u + offset`` is the attack-free prediction.
        """
        _finite("input", u, offset)
        z_next = self._z[0] + self.k_gain * (
            -self._x[0] + self.g_p * u + offset + self.gamma_hat * self.d_hat
        )
        self._z.append(z_next)

    def step(self, x: float, u: float, offset: float = 0.0) -> float:
        d = self.estimate(x)
        self.update(u, offset)
        return d


def effect_error_trace(d, gamma, gamma_hat, phi, eta=0.5, g_p=1.0, lag=1, robust=False):
    """Run the linear loop x_{k+1} = g_p*u_k + gamma*d_k with an observer.

    Returns gamma*d_k - gamma_hat*d_hat_k for every k.  The controller is the
    integral price update driven by x_k; with ``robust`` the compensator is
    subtracted from its output.
    """
    obs = DisturbanceObserver(phi, gamma_hat, g_p, lag=lag)
    d = np.asarray(d, dtype=float)
    err = np.empty_like(d)
    x, c = 0.0, 0.0
    for k, dk in enumerate(d):
        dh = obs.estimate(x)
        c -= 2.0 * eta / g_p * x
        u = c - gamma_hat * dh / g_p if robust else c
        obs.update(u)
        err[k] = gamma * dk - gamma_hat * dh
        x = g_p * u + gamma * dk
    return err


@dataclass
class LowPassFilter:
    """Direct-form II transposed IIR section, normalized so a[0] == 1."""

    b: np.ndarray
    a: np.ndarray
    T: float
    omega_c: float = float("nan")
    state: np.ndarray = field(default=None)

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        self.a = np.asarray(self.a, dtype=float)
        if self.state is None:
            self.state = np.zeros(len(self.a) - 1)

    @property
    def order(self) -> int:
        return len(self.a) - 1

    def poles(self) -> np.ndarray:
        return np.roots(self.a)

    def response(self, omega):
        z = np.exp(1j * np.asarray(omega, dtype=float) * self.T)
        return np.polyval(self.b, z) / np.polyval(self.a, z)

    def dc_gain(self) -> float:
        return float(np.sum(self.b) / np.sum(self.a))

    def reset(self, value: float = 0.0) -> None:
        """Set the internal state to the steady state of a constant input."""
        y = value * self.dc_gain()
        n = self.order
        s = np.zeros(n)
        for i in range(n):
            s[i] = sum(self.b[j] * value - self.a[j] * y for j in range(i + 1, n + 1))
        self.state = s

    def step(self, x: float) -> float:
        _finite("filter input", x)
        b, a, s = self.b, self.a, self.state
        y = b[0] * x + s[0]
        n = self.order
        for i in range(n - 1):
            s[i] = s[i + 1] + b[i + 1] * x - a[i + 1] * y
        s[n - 1] = b[n] * x - a[n] * y
        return y

    def copy(self) -> "LowPassFilter":
        return LowPassFilter(self.b.copy(), self.a.copy(), self.T, self.omega_c, self.state.copy())


def design_lowpass(omega_c: float, T: float, order: int = 4) -> LowPassFilter:
    """Butterworth low-pass via the bilinear map with cutoff prewarping.

    The -3 dB point lands exactly on ``omega_c`` and all ``order`` zeros sit
    at z = -1, so the response vanishes at pi/T.
    """
    if not T > 0:
        raise DomainError(f"T must be > 0, got {T}")
    if not 0.0 < omega_c < math.pi / T:
        raise DomainError(f"omega_c must be in (0, pi/T), got {omega_c}")
    if order < 1:
        raise DomainError("order must be >= 1")
    wa = 2.0 / T * math.tan(omega_c * T / 2.0)
    k = np.arange(1, order + 1)
    s_poles = wa * np.exp(1j * math.pi * (2 * k + order - 1) / (2 * order))
    z_poles = (1 + s_poles * T / 2) / (1 - s_poles * T / 2)
    a = np.real(np.poly(z_poles))
    b = np.real(np.poly(-np.ones(order)))
    b *= np.sum(a) / np.sum(b)
    return LowPassFilter(b=b, a=a, T=T, omega_c=omega_c)
