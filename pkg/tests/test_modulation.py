"""Carrier PWM and staircase level selection."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scmmi.modulation import (
    carrier_bank,
    pwm_level,
    pwm_levels,
    sinusoidal_references,
    staircase_level,
    staircase_levels,
)
from scmmi.switching import level_to_switch_vector


def test_carrier_bank_bands():
    bank = carrier_bank(5, 10e3)
    assert bank.n_bands == 2
    assert carrier_bank(7, 10e3).n_bands == 3


def test_references_balanced():
    refs = sinusoidal_references(0.0123, 50.0, 3, 0.9)
    assert refs.shape == (3,)
    assert abs(refs.sum()) < 1e-12
    assert np.max(np.abs(refs)) <= 0.9 + 1e-12


@settings(max_examples=40)
@given(st.floats(min_value=-1.0, max_value=1.0), st.integers(1, 4))
def test_pwm_duty_weighted_mean(v_ref, n_bands):
    # averaged over one carrier period the signed level equals v_ref*n_bands
    bank = carrier_bank(2 * n_bands + 1, 1000.0)
    n = 2000
    t = np.arange(n) / (n * bank.frequency)
    levels = pwm_levels(t, np.full(n, v_ref), bank)
    assert abs(levels.mean() - v_ref * n_bands) <= 2.0 * n_bands / n


def test_pwm_levels_bounded_and_signed():
    bank = carrier_bank(5, 10e3)
    t = np.linspace(0.0, 0.02, 5000)
    refs = np.sin(2 * math.pi * 50.0 * t)
    levels = pwm_levels(t, refs, bank)
    assert levels.min() >= -2 and levels.max() <= 2
    assert np.all(levels[refs < -0.6] <= 0)
    assert np.all(levels[refs > 0.6] >= 0)


def test_pwm_level_polarity_hint():
    bank = carrier_bank(5, 10e3)
    assert pwm_level(0.0, -0.1, bank, 5).polarity_hint == -1
    assert pwm_level(0.0, 0.1, bank, 5).polarity_hint == 1
    with pytest.raises(ValueError):
        pwm_level(0.0, 0.1, bank, 7)


def test_staircase_nearest_level():
    assert list(staircase_levels([0.0, 0.2, 0.3, 0.6, 0.9, 1.0], 2)) == \
        [0, 0, 1, 1, 2, 2]
    assert list(staircase_levels([-0.3, -0.8], 2)) == [-1, -2]


def test_staircase_ties_round_toward_zero():
    # band edges at odd multiples of 1/(2*n_bands)
    assert staircase_levels([0.25], 2)[0] == 0
    assert staircase_levels([-0.25], 2)[0] == 0
    assert staircase_levels([0.75], 2)[0] == 1


@given(st.floats(min_value=-1.0, max_value=1.0), st.integers(1, 5))
def test_staircase_odd_symmetry(v, n_bands):
    assert staircase_levels([-v], n_bands)[0] == -staircase_levels([v], n_bands)[0]


@given(st.floats(min_value=-1.0, max_value=1.0), st.integers(1, 5))
def test_staircase_quantization_error(v, n_bands):
    lvl = staircase_levels([v], n_bands)[0]
    assert abs(lvl - v * n_bands) <= 0.5 + 1e-9


def test_s1_gate_switches_twice_per_fundamental():
    # the zero-state sign comparator makes S_1 a fundamental-rate square wave
    f, n_levels = 50.0, 5
    bank = carrier_bank(n_levels, 10e3)
    t = np.arange(0, 0.02, 5e-6)
    s1 = []
    for tk in t:
        ref = math.sin(2 * math.pi * f * tk + 0.3)
        cmd = pwm_level(tk, ref, bank, n_levels)
        s1.append(level_to_switch_vector(cmd, n_levels)[0])
    s1 = np.asarray(s1)
    toggles = int(np.count_nonzero(np.diff(s1)))
    assert toggles == 2
    # and it tracks the reference sign exactly
    refs = np.sin(2 * math.pi * f * t + 0.3)
    assert np.array_equal(s1, refs < 0)
