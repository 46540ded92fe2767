"""Non-parametric CUSUM over increments of the scaled disturbance estimate."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import CalibrationError, SignalError

DEFAULT_DELTA = 10.0
SAFETY_FACTOR = 1.2
MIN_CALIBRATION = 10


@dataclass
class Cusum:
    """S_k = max(0, S_{k-1} + |g_k - g_{k-1}| - alpha); alarm once S_k > delta.

    ``g`` is gamma_hat * d_hat in MW.  The first sample only primes the
    previous value, so sample k contributes the k-th increment.  The alarm
    latches until :meth:`reset`.
    """

    alpha: float = 0.0
    delta: float = DEFAULT_DELTA
    s: float = 0.0
    prev_scaled_dhat: Optional[float] = None
    k: int = -1
    alarmed_at: Optional[int] = None

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")

    @property
    def alarm(self) -> bool:
        return self.alarmed_at is not None

    def step(self, scaled_dhat: float) -> "Cusum":
        if not math.isfinite(scaled_dhat):
            raise SignalError(f"non-finite input to CUSUM: {scaled_dhat}")
        self.k += 1
        if self.prev_scaled_dhat is not None:
            inc = abs(scaled_dhat - self.prev_scaled_dhat)
            self.s = max(0.0, self.s + inc - self.alpha)
            if self.alarmed_at is None and self.s > self.delta:
                self.alarmed_at = self.k
        self.prev_scaled_dhat = scaled_dhat
        return self

    def reset(self) -> None:
        self.s = 0.0
        self.prev_scaled_dhat = None
        self.k = -1
        self.alarmed_at = None


def calibrate_alpha(attack_free: Sequence[float], safety: float = SAFETY_FACTOR) -> float:
    """Drift = safety * largest increment seen on an attack-free trace."""
    g = np.asarray(attack_free, dtype=float)
    if g.size < MIN_CALIBRATION:
        raise CalibrationError(
            f"need at least {MIN_CALIBRATION} attack-free samples, got {g.size}"
        )
    if not np.all(np.isfinite(g)):
        raise SignalError("non-finite value in calibration trace")
    return float(safety * np.max(np.abs(np.diff(g))))


def cusum_path(scaled_dhat: Sequence[float], alpha: float, delta: float = DEFAULT_DELTA):
    """Statistic after each sample and the first alarm index (or None)."""
    det = Cusum(alpha=alpha, delta=delta)
    s = np.empty(len(scaled_dhat))
    for i, g in enumerate(scaled_dhat):
        s[i] = det.step(float(g)).s
    return s, det.alarmed_at


def detection_time(scaled_dhat: Sequence[float], alpha: float, delta: float = DEFAULT_DELTA,
                   start: int = 0) -> Optional[int]:
    """Steps from ``start`` until the alarm, or None.

    The detector is primed with the sample just before ``start`` when one
    exists, so the first increment it sees is the one at the attack onset.
    """
    g = np.asarray(scaled_dhat, dtype=float)
    first = max(start - 1, 0)
    _, alarm = cusum_path(g[first:], alpha, delta)
    if alarm is None:
        return None
    return first + alarm - start
