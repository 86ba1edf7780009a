"""Waveform record container and its CSV round trip."""

import numpy as np
import pytest

from scmmi.waveform import WaveformRecord, read_csv, write_csv


def _sample_record():
    t = np.arange(50)
    return WaveformRecord(
        sample_period=1e-6,
        channels={
            "V_1": np.sin(t * 0.1) * 123.456789,
            "I_1": np.cos(t * 0.1) * 0.001234,
            "V_C11": np.full(50, 200.0),
        },
        metadata={"t_start": 0.0},
    )


def test_channel_access_and_time():
    rec = _sample_record()
    assert rec.n_samples == 50
    assert rec.time()[1] == pytest.approx(1e-6)
    with pytest.raises(KeyError):
        rec.channel("V_99")


def test_mismatched_channel_lengths_rejected():
    with pytest.raises(ValueError):
        WaveformRecord(1e-6, {"a": np.zeros(3), "b": np.zeros(4)})


def test_csv_round_trip(tmp_path):
    rec = _sample_record()
    path = tmp_path / "out.csv"
    write_csv(rec, path)
    back = read_csv(path)
    assert set(back.channels) == set(rec.channels)
    assert back.sample_period == pytest.approx(rec.sample_period)
    for name in rec.channels:
        assert np.allclose(back.channel(name), rec.channel(name), rtol=1e-9)


def test_csv_header_units(tmp_path):
    path = tmp_path / "out.csv"
    write_csv(_sample_record(), path)
    header = path.read_text().splitlines()[0]
    assert header == "time_s,V_1_V,I_1_A,V_C11_V"


def test_csv_byte_identical_for_identical_records(tmp_path):
    rec = _sample_record()
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(rec, p1)
    write_csv(rec, p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert b"\r" not in p1.read_bytes()


def test_csv_bad_rows_reported_with_line_number(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time_s,V_1_V\n0,1\n1e-6,2\n2e-6\n")
    with pytest.raises(ValueError, match="row 4"):
        read_csv(path)
    path.write_text("volts,V_1_V\n0,1\n1e-6,2\n")
    with pytest.raises(ValueError, match="time_s"):
        read_csv(path)
