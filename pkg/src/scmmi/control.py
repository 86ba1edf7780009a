"""Supervisory balancing aids for abnormal load scenarios.

A proportional correction with deadband and clamp, applied per phase to
the modulation index or to current/torque references. The sign convention
makes an over-voltage phase draw more load (larger factor) so it
discharges toward the average; the natural drain mechanism is never
opposed. Inputs are cycle-averaged voltages so the limiters do not react
to switching ripple.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "LimiterConfig",
    "correction_factors",
    "mi_limiter",
    "current_ref_limiter",
    "torque_ref_limiter",
    "CycleAverager",
]


@dataclass(frozen=True)
class LimiterConfig:
    deadband: float = 2.5   # percent deviation ignored entirely
    gain: float = 1.0       # per-unit correction per per-unit deviation
    floor: float = 0.8      # lower clamp on the correction factor
    ceiling: float = 1.2    # upper clamp

    def __post_init__(self):
        if not (0.0 < self.floor <= 1.0 <= self.ceiling):
            raise ValueError("need 0 < floor <= 1 <= ceiling")
        if self.deadband < 0:
            raise ValueError("deadband must be >= 0")


def correction_factors(cap_voltages, v_avg: float, cfg: LimiterConfig):
    """Per-phase multiplicative correction for the given bus-cap voltages."""
    if v_avg <= 0:
        raise ValueError("v_avg must be positive")
    v = np.asarray(cap_voltages, dtype=float)
    dev = (v - v_avg) / v_avg
    factor = np.clip(1.0 + cfg.gain * dev, cfg.floor, cfg.ceiling)
    return np.where(np.abs(dev) <= cfg.deadband / 100.0, 1.0, factor)


def mi_limiter(cap_voltages, v_avg: float, mi_nominal: float,
               cfg: LimiterConfig):
    """Per-phase modulation indices correcting bus-capacitor imbalance."""
    return mi_nominal * correction_factors(cap_voltages, v_avg, cfg)


def current_ref_limiter(i_ref: float, v_c: float, v_avg: float,
                        cfg: LimiterConfig) -> float:
    """Limited current reference for one phase."""
    return float(i_ref * correction_factors([v_c], v_avg, cfg)[0])


def torque_ref_limiter(t_ref: float, v_c: float, v_avg: float,
                       cfg: LimiterConfig) -> float:
    """Limited torque reference; same law as the current limiter."""
    return float(t_ref * correction_factors([v_c], v_avg, cfg)[0])


class CycleAverager:
    """Moving average of per-phase samples over one fundamental period.

    Owned by the simulation loop; not safe for concurrent writers.
    """

    def __init__(self, n_phases: int, window: int, initial: float):
        if window < 1:
            raise ValueError("window must be >= 1")
        self._buf = np.full((window, n_phases), float(initial))
        self._sum = self._buf.sum(axis=0)
        self._pos = 0
        self._window = window

    def push(self, values):
        v = np.asarray(values, dtype=float)
        self._sum += v - self._buf[self._pos]
        self._buf[self._pos] = v
        self._pos = (self._pos + 1) % self._window

    @property
    def mean(self):
        return self._sum / self._window
