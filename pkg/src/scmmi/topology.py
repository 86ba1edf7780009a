"""Closed-form design calculator for the generalized switched-capacitor MMI.

Component counts, reachable voltage levels, the boost condition, and device
voltage ratings for an N_L-level sub-module stacked n times across a single
dc source. All functions are pure.
"""

from dataclasses import dataclass

from .errors import InvalidLevelCountError

__all__ = [
    "SubModuleSpec",
    "RatingReport",
    "component_counts",
    "voltage_levels",
    "is_boosting",
    "device_ratings",
    "nominal_capacitor_voltage",
]


@dataclass(frozen=True)
class SubModuleSpec:
    """Component census of a single N_L-level sub-module."""

    levels: int
    n_switches: int
    n_capacitors: int
    n_no_diode: int      # switches that must NOT carry an antiparallel diode
    n_with_diode: int    # switches that must carry one
    n_any_diode: int     # switches where either kind works


@dataclass(frozen=True)
class RatingReport:
    """Voltage ratings for capacitors and switches of one sub-module."""

    capacitor_rating: float
    inner_switch_rating: float   # series/parallel ladder switches
    outer_switch_rating: float   # output bridge S_1..S_4
    level_set: tuple


def _check_levels(n_levels):
    if not isinstance(n_levels, int) or n_levels < 3 or n_levels % 2 == 0:
        raise InvalidLevelCountError(
            f"level count must be an odd integer >= 3, got {n_levels!r}"
        )


def component_counts(n_levels: int) -> SubModuleSpec:
    """Switch and capacitor counts for an N_L-level sub-module."""
    _check_levels(n_levels)
    n_switches = (3 * n_levels - 1) // 2
    n_capacitors = (n_levels - 1) // 2
    n_no_diode = (n_levels - 3) // 2
    n_with_diode = 2
    n_any_diode = n_levels - 1
    return SubModuleSpec(
        levels=n_levels,
        n_switches=n_switches,
        n_capacitors=n_capacitors,
        n_no_diode=n_no_diode,
        n_with_diode=n_with_diode,
        n_any_diode=n_any_diode,
    )


def nominal_capacitor_voltage(n_phases: int, v_dc: float) -> float:
    """Steady-state voltage every sub-module capacitor converges to."""
    if n_phases < 1:
        raise ValueError("phase count must be >= 1")
    return v_dc / n_phases


def voltage_levels(n_levels: int, n_phases: int, v_dc: float):
    """All reachable phase voltages, sorted ascending.

    The set is {+-k*V_DC/n : 0 < 2k+1 <= N_L} plus zero; exactly N_L
    entries, symmetric about zero with step V_DC/n.
    """
    _check_levels(n_levels)
    if n_phases < 1:
        raise ValueError("phase count must be >= 1")
    if v_dc <= 0:
        raise ValueError("v_dc must be positive")
    step = v_dc / n_phases
    half = (n_levels - 1) // 2
    return [k * step for k in range(-half, half + 1)]


def is_boosting(n_levels: int, n_phases: int) -> bool:
    """True iff the peak phase voltage exceeds the dc source voltage."""
    _check_levels(n_levels)
    if n_phases < 1:
        raise ValueError("phase count must be >= 1")
    return n_levels > 2 * n_phases + 1


def device_ratings(n_levels: int, n_phases: int, v_dc: float) -> RatingReport:
    """Capacitor and switch voltage ratings for the stacked system.

    Inner (ladder) switches and capacitors see one capacitor voltage,
    V_DC/n; the four output-bridge switches block the full peak level.
    """
    levels = voltage_levels(n_levels, n_phases, v_dc)
    v_cap = nominal_capacitor_voltage(n_phases, v_dc)
    outer = (n_levels - 1) * v_dc / (2 * n_phases)
    return RatingReport(
        capacitor_rating=v_cap,
        inner_switch_rating=v_cap,
        outer_switch_rating=outer,
        level_set=tuple(levels),
    )
