"""Reference generation and level selection.

Two modes: carrier-based PWM against a bank of in-phase level-shifted
saw-tooth carriers, and a carrier-free staircase (nearest level) mode used
to isolate the Fourier-series predictions from PWM sidebands.
"""

import math
from dataclasses import dataclass

import numpy as np

from .switching import LevelCommand

__all__ = [
    "CarrierBank",
    "carrier_bank",
    "sinusoidal_references",
    "pwm_level",
    "pwm_levels",
    "staircase_level",
    "staircase_levels",
]


@dataclass(frozen=True)
class CarrierBank:
    """In-phase level-shifted saw-tooth carriers tiling [0, 1].

    Band h of n_bands spans [h/n_bands, (h+1)/n_bands); each carrier ramps
    from the bottom to the top of its band once per period.
    """

    n_bands: int
    frequency: float
    phase: float = 0.0


def carrier_bank(n_levels: int, carrier_f: float, phase: float = 0.0) -> CarrierBank:
    return CarrierBank(n_bands=(n_levels - 1) // 2, frequency=carrier_f, phase=phase)


def sinusoidal_references(t: float, f: float, n_phases: int, mi: float):
    """Per-phase references mi*sin(2*pi*f*t + 2*pi*i/n), i = 1..n."""
    i = np.arange(1, n_phases + 1)
    return mi * np.sin(2.0 * math.pi * f * t + 2.0 * math.pi * i / n_phases)


def _saw(t, bank):
    # normalized carrier position within its band, in [0, 1)
    x = t * bank.frequency + bank.phase / (2.0 * math.pi)
    return x - np.floor(x)


def pwm_levels(t: float, v_refs, bank: CarrierBank):
    """Vectorized saw-tooth comparison; returns signed integer levels.

    The duty-weighted mean of the output over one carrier period equals
    |v_ref| * n_bands within one level. The polarity hint for the zero
    state is sign(v_ref) (negative references close S_1).
    """
    v = np.asarray(v_refs, dtype=float)
    u = np.minimum(np.abs(v), 1.0) * bank.n_bands
    h = np.minimum(np.floor(u), bank.n_bands - 1)
    frac = u - h
    level = (h + (frac > _saw(t, bank))).astype(int)
    return np.where(v < 0, -level, level)


def pwm_level(t: float, v_ref: float, bank: CarrierBank, n_levels: int) -> LevelCommand:
    """Level command for a single phase at time t."""
    if bank.n_bands != (n_levels - 1) // 2:
        raise ValueError("carrier bank does not match the level count")
    lvl = int(pwm_levels(t, [v_ref], bank)[0])
    return LevelCommand(lvl, -1 if v_ref < 0 else 1)


def staircase_levels(v_refs, n_bands: int):
    """Nearest-level quantization with ties rounding toward zero."""
    v = np.asarray(v_refs, dtype=float)
    q = np.abs(v) * n_bands
    m = np.minimum(np.ceil(q - 0.5), n_bands).astype(int)
    return np.where(v < 0, -m, m)


def staircase_level(t: float, v_ref: float, n_levels: int) -> LevelCommand:
    """Carrier-free level command (t is accepted for interface parity)."""
    lvl = int(staircase_levels([v_ref], (n_levels - 1) // 2)[0])
    return LevelCommand(lvl, -1 if v_ref < 0 else 1)
