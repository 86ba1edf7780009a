"""System configuration validation and fingerprinting."""

import numpy as np
import pytest

from scmmi.config import LoadModel, SystemConfig
from scmmi.errors import ConfigError


def test_defaults_are_valid():
    cfg = SystemConfig()
    assert cfg.n_caps == 2
    assert cfg.nominal_cap_voltage == pytest.approx(200.0)
    assert cfg.steps_per_fundamental() == 20000


def test_initial_caps_shapes():
    cfg = SystemConfig()
    assert cfg.initial_caps().shape == (3, 2)
    assert np.all(cfg.initial_caps() == 200.0)
    cfg2 = cfg.with_(initial_cap_voltages=150.0)
    assert np.all(cfg2.initial_caps() == 150.0)
    with pytest.raises(ConfigError):
        SystemConfig(initial_cap_voltages=[[200.0, 200.0]])


@pytest.mark.parametrize("kwargs", [
    dict(levels=4),
    dict(levels=1),
    dict(phases=0),
    dict(v_dc=-600.0),
    dict(modulation_index=0.0),
    dict(modulation_index=1.5),
    dict(dt=1e-3),                      # too coarse for the carrier
    dict(carrier_f=100.0),              # too close to the fundamental
    dict(modulation_mode="spacevector"),
    dict(record_every=0),
    dict(cap_esr=0.0),
    dict(r_on=-1e-3),
])
def test_invalid_configs_rejected(kwargs):
    with pytest.raises((ConfigError, ValueError)):
        SystemConfig(**kwargs)


def test_load_model_validation():
    with pytest.raises(ConfigError):
        LoadModel(variant="star")
    with pytest.raises(ConfigError):
        LoadModel(coupling_k=1.0)
    with pytest.raises(ConfigError):
        LoadModel(variant="independent_rl", l_self=0.0)
    with pytest.raises(ConfigError):
        LoadModel(r_phase=(10.0, -1.0, 10.0)).resistances(3)
    with pytest.raises(ConfigError):
        LoadModel(r_phase=(10.0, 10.0)).resistances(3)


def test_load_model_matrices():
    m = LoadModel(l_self=0.3, coupling_k=0.95).inductance_matrix(3)
    assert m.shape == (3, 3)
    assert np.linalg.eigvalsh(m).min() > 0
    assert m[0, 1] == pytest.approx(0.285)
    assert LoadModel(variant="independent_r").inductance_matrix(3) is None
    diag = LoadModel(variant="independent_rl").inductance_matrix(2)
    assert np.allclose(diag, np.eye(2) * 0.3)


def test_digest_distinguishes_configs():
    a = SystemConfig()
    b = SystemConfig(v_dc=601.0)
    assert a.digest() == SystemConfig().digest()
    assert a.digest() != b.digest()
    assert a.digest() != a.with_(balance_in_zero=True).digest()
    assert len(a.digest()) == 16


def test_with_replaces_fields():
    cfg = SystemConfig().with_(levels=7, v_dc=400.0)
    assert cfg.levels == 7
    assert cfg.n_caps == 3
    assert cfg.nominal_cap_voltage == pytest.approx(400.0 / 3.0)
