"""Design-formula tests: component counts, level sets, ratings, boost rule."""

import pytest
from hypothesis import given, strategies as st

from scmmi.errors import InvalidLevelCountError
from scmmi.topology import (
    component_counts,
    device_ratings,
    is_boosting,
    nominal_capacitor_voltage,
    voltage_levels,
)

odd_levels = st.integers(min_value=1, max_value=10).map(lambda k: 2 * k + 1)


def test_reference_counts():
    five = component_counts(5)
    assert (five.n_switches, five.n_capacitors) == (7, 2)
    three = component_counts(3)
    assert (three.n_switches, three.n_capacitors) == (4, 1)
    seven = component_counts(7)
    assert (seven.n_switches, seven.n_capacitors) == (10, 3)


def test_diode_census_five_level():
    spec = component_counts(5)
    assert spec.n_no_diode == 1
    assert spec.n_with_diode == 2
    assert spec.n_any_diode == 4


@given(odd_levels)
def test_partition_identity(n_levels):
    # the three diode classes partition the switch population
    spec = component_counts(n_levels)
    assert spec.n_no_diode + spec.n_with_diode + spec.n_any_diode == spec.n_switches
    assert spec.n_switches == (3 * n_levels - 1) // 2
    assert spec.n_capacitors == (n_levels - 1) // 2


@pytest.mark.parametrize("bad", [2, 4, 1, 0, -5, 6])
def test_even_or_small_levels_rejected(bad):
    with pytest.raises(InvalidLevelCountError):
        component_counts(bad)


def test_non_integer_levels_rejected():
    with pytest.raises(InvalidLevelCountError):
        component_counts(5.0)


def test_voltage_levels_five():
    assert voltage_levels(5, 3, 600.0) == [-400.0, -200.0, 0.0, 200.0, 400.0]


@given(odd_levels, st.integers(min_value=1, max_value=6))
def test_level_set_symmetry(n_levels, n_phases):
    lv = voltage_levels(n_levels, n_phases, 600.0)
    assert len(lv) == n_levels
    assert lv == sorted(lv)
    # symmetric about zero
    for a, b in zip(lv, reversed(lv)):
        assert a == pytest.approx(-b)
    step = 600.0 / n_phases
    diffs = [b - a for a, b in zip(lv, lv[1:])]
    assert all(d == pytest.approx(step) for d in diffs)


def test_boost_condition():
    assert not is_boosting(5, 3)       # 5 <= 2*3+1
    assert not is_boosting(7, 3)       # equality is not boosting
    assert is_boosting(9, 3)
    assert is_boosting(5, 1)


def test_nominal_capacitor_voltage():
    assert nominal_capacitor_voltage(3, 600.0) == pytest.approx(200.0)
    with pytest.raises(ValueError):
        nominal_capacitor_voltage(0, 600.0)


def test_device_ratings_five_level():
    r = device_ratings(5, 3, 600.0)
    assert r.capacitor_rating == pytest.approx(200.0)
    assert r.inner_switch_rating == pytest.approx(200.0)
    # bridge switches block the full peak level, (N_L-1)/2 capacitor voltages
    assert r.outer_switch_rating == pytest.approx(400.0)
    assert r.level_set == (-400.0, -200.0, 0.0, 200.0, 400.0)


@given(odd_levels, st.integers(min_value=1, max_value=6))
def test_outer_rating_equals_peak_level(n_levels, n_phases):
    r = device_ratings(n_levels, n_phases, 600.0)
    assert r.outer_switch_rating == pytest.approx(max(r.level_set))
