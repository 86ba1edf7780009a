"""Bundled simulation scenarios mirroring the reference experiments.

Each preset pairs a SystemConfig with a default duration and an
expected-metric manifest that the analyze round-trip (and the acceptance
suite) checks against.
"""

import numpy as np

from .config import LoadModel, SystemConfig
from .errors import ConfigError
from .topology import voltage_levels

__all__ = ["ScenarioPreset", "get_preset", "PRESET_NAMES"]

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    config: SystemConfig
    duration: float
    expected: dict = field(default_factory=dict)


def _coupled_load(r_phase=460.0):
    return LoadModel(variant="coupled_rl", r_phase=r_phase, l_self=0.3,
                     coupling_k=0.95)


def _five_level(r_phase=460.0) -> SystemConfig:
    return SystemConfig(phases=3, levels=5, v_dc=600.0,
                        load=_coupled_load(r_phase))


def _seven_level() -> SystemConfig:
    # light load: the deepest ladder capacitor stays series-inserted for
    # most of each half-cycle at MI = 1, so its droop (I*t/C) budgets the
    # phase current much tighter than in the five-level case
    return SystemConfig(phases=3, levels=7, v_dc=400.0,
                        load=_coupled_load(2200.0))


def _perturbed_caps(cfg: SystemConfig, phase: int, delta: float):
    caps = cfg.initial_caps()
    caps[phase, :] += delta
    caps[np.arange(cfg.phases) != phase, 0] -= delta / (cfg.phases - 1)
    return caps


def _preset_five() -> ScenarioPreset:
    cfg = _five_level()
    return ScenarioPreset(
        name="five-level-steady", config=cfg, duration=0.2,
        expected={
            "cap_mean_v": cfg.nominal_cap_voltage,
            "cap_mean_tol_pct": 2.0,
            "cap_ripple_max_pct": 5.0,
            "phase_levels_v": voltage_levels(5, 3, 600.0),
            "level_tol_v": 15.0,
        })


def _preset_seven() -> ScenarioPreset:
    cfg = _seven_level()
    return ScenarioPreset(
        name="seven-level-steady", config=cfg, duration=0.2,
        expected={
            "cap_mean_v": cfg.nominal_cap_voltage,
            "cap_mean_tol_pct": 2.0,
            "cap_ripple_max_pct": 4.0,
            "phase_levels_v": voltage_levels(7, 3, 400.0),
            "level_tol_v": 15.0,
        })


def _preset_perturbation() -> ScenarioPreset:
    # heavier load than the steady preset: recovery speed scales with the
    # power the imbalance can push through the phase windings
    base = _five_level(r_phase=150.0)
    cfg = base.with_(initial_cap_voltages=_perturbed_caps(base, 0, 100.0))
    return ScenarioPreset(
        name="perturbation", config=cfg, duration=0.3,
        expected={
            "settle_target_v": cfg.nominal_cap_voltage,
            "settle_band_pct": 2.0,
            "settle_max_s": 0.2,
        })


def _preset_imbalanced() -> ScenarioPreset:
    # unequal single-phase resistive loads; no winding coupling, so the
    # system drifts to a shifted stationary point unless the MI limiter acts
    base = _five_level().with_(
        load=LoadModel(variant="independent_r", r_phase=(135.0, 150.0, 165.0)))
    cfg = base.with_(initial_cap_voltages=_perturbed_caps(base, 0, 20.0))
    return ScenarioPreset(
        name="imbalanced-load", config=cfg, duration=0.5,
        expected={
            "stationary_after_s": 0.3,
            "cap_mean_v": cfg.nominal_cap_voltage,
        })


_FACTORIES = {
    "five-level-steady": _preset_five,
    "seven-level-steady": _preset_seven,
    "perturbation": _preset_perturbation,
    "imbalanced-load": _preset_imbalanced,
}

PRESET_NAMES = tuple(_FACTORIES)


def get_preset(name: str) -> ScenarioPreset:
    try:
        return _FACTORIES[name]()
    except KeyError:
        raise ConfigError(
            f"unknown scenario {name!r}; choose from {', '.join(PRESET_NAMES)}"
        ) from None
