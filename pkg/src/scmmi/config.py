"""Full electrical + modulation + simulation parameterization.

Defaults follow the five-level reference parameter set (600 V, n = 3,
220 uF, 10 mOhm ESR and on-resistance). Carrier frequency and time step
are artifact choices: 10 kHz and 1 us give >= 100 steps per carrier
period so PWM edges are resolved and the stiff paralleling RC transients
stay stable under backward Euler.
"""

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

from .control import LimiterConfig
from .errors import ConfigError
from .topology import component_counts

__all__ = ["LoadModel", "SystemConfig"]

COUPLED_RL = "coupled_rl"
INDEPENDENT_RL = "independent_rl"
INDEPENDENT_R = "independent_r"
_VARIANTS = (COUPLED_RL, INDEPENDENT_RL, INDEPENDENT_R)


@dataclass(frozen=True)
class LoadModel:
    """Per-phase load branch, optionally magnetically coupled.

    r_phase may be a scalar (equal phases) or a per-phase sequence.
    coupling_k populates the symmetric mutual-inductance matrix
    M = coupling_k * l_self off-diagonal (coupled_rl only).
    """

    variant: str = COUPLED_RL
    r_phase: object = 460.0
    l_self: float = 0.3
    coupling_k: float = 0.95

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ConfigError(f"unknown load variant {self.variant!r}")
        if self.variant == COUPLED_RL and not (0.0 <= self.coupling_k < 1.0):
            raise ConfigError("coupling_k must be in [0, 1)")
        if self.variant != INDEPENDENT_R and self.l_self <= 0:
            raise ConfigError("l_self must be positive for inductive loads")

    def resistances(self, n_phases: int):
        r = np.asarray(self.r_phase, dtype=float)
        if r.ndim == 0:
            r = np.full(n_phases, float(r))
        if r.shape != (n_phases,):
            raise ConfigError(
                f"r_phase needs 1 or {n_phases} values, got shape {r.shape}"
            )
        if np.any(r <= 0):
            raise ConfigError("phase resistances must be positive")
        return r

    def inductance_matrix(self, n_phases: int):
        """Symmetric positive definite inductance matrix, or None for R-only."""
        if self.variant == INDEPENDENT_R:
            return None
        if self.variant == INDEPENDENT_RL:
            return np.eye(n_phases) * self.l_self
        m = np.full((n_phases, n_phases), self.coupling_k * self.l_self)
        np.fill_diagonal(m, self.l_self)
        if np.linalg.eigvalsh(m).min() <= 0:
            raise ConfigError("inductance matrix is not positive definite")
        return m


@dataclass(frozen=True)
class SystemConfig:
    phases: int = 3
    levels: int = 5
    v_dc: float = 600.0
    capacitance: float = 220e-6
    cap_esr: float = 10e-3
    r_on: float = 10e-3
    g_off: float = 1e-9
    source_r: float = 10e-3
    fundamental_f: float = 50.0
    carrier_f: float = 10e3
    modulation_index: float = 1.0
    dt: float = 1e-6
    load: LoadModel = field(default_factory=LoadModel)
    initial_cap_voltages: object = None   # (phases, caps) array, else V_DC/n
    modulation_mode: str = "pwm"          # 'pwm' | 'staircase'
    balance_in_zero: bool = False
    mi_limiter_enabled: bool = False
    limiter: LimiterConfig = field(default_factory=LimiterConfig)
    record_every: int = 1

    def __post_init__(self):
        if self.phases < 1:
            raise ConfigError("phases must be >= 1")
        component_counts(self.levels)  # validates odd >= 3
        if self.v_dc <= 0 or self.capacitance <= 0:
            raise ConfigError("v_dc and capacitance must be positive")
        for name in ("cap_esr", "r_on", "source_r"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.g_off <= 0:
            raise ConfigError("g_off must be positive")
        if not (0.0 < self.modulation_index <= 1.0):
            raise ConfigError("modulation_index must be in (0, 1]")
        if self.dt <= 0 or self.dt > 1.0 / (20.0 * self.carrier_f):
            raise ConfigError("need dt <= 1/(20*carrier_f)")
        if self.carrier_f < 10.0 * self.fundamental_f:
            raise ConfigError("need carrier_f >= 10*fundamental_f")
        if self.modulation_mode not in ("pwm", "staircase"):
            raise ConfigError(f"unknown modulation mode {self.modulation_mode!r}")
        if self.record_every < 1:
            raise ConfigError("record_every must be >= 1")
        self.load.resistances(self.phases)
        self.load.inductance_matrix(self.phases)
        _ = self.initial_caps()  # validate shape early

    @property
    def n_caps(self) -> int:
        return (self.levels - 1) // 2

    @property
    def nominal_cap_voltage(self) -> float:
        return self.v_dc / self.phases

    def initial_caps(self):
        """Initial capacitor voltage matrix, shape (phases, n_caps)."""
        if self.initial_cap_voltages is None:
            return np.full((self.phases, self.n_caps), self.nominal_cap_voltage)
        v = np.asarray(self.initial_cap_voltages, dtype=float)
        if v.ndim == 0:
            return np.full((self.phases, self.n_caps), float(v))
        if v.shape != (self.phases, self.n_caps):
            raise ConfigError(
                f"initial_cap_voltages must have shape "
                f"({self.phases}, {self.n_caps}), got {v.shape}"
            )
        return v.copy()

    def with_(self, **kwargs) -> "SystemConfig":
        return replace(self, **kwargs)

    def digest(self) -> str:
        """Stable fingerprint of every parameter, for record metadata."""
        init = self.initial_caps()
        parts = [
            f"{k}={getattr(self, k)!r}"
            for k in (
                "phases", "levels", "v_dc", "capacitance", "cap_esr", "r_on",
                "g_off", "source_r", "fundamental_f", "carrier_f",
                "modulation_index", "dt", "modulation_mode", "balance_in_zero",
                "mi_limiter_enabled", "record_every",
            )
        ]
        parts.append(f"load={self.load!r}")
        parts.append(f"limiter={self.limiter!r}")
        parts.append("init=" + ",".join(f"{x:.9g}" for x in init.ravel()))
        return hashlib.sha256("|".join(parts).encode()).hexdigest()[:16]

    def steps_per_fundamental(self) -> int:
        return int(round(1.0 / (self.fundamental_f * self.dt)))
