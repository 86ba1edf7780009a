"""Uniformly sampled multichannel simulation output and its CSV form.

CSV layout: first column ``time_s``, one column per channel with a unit
suffix appended to the channel name (``V_C11`` -> ``V_C11_V``), decimal
point, LF line endings. Byte-identical for identical inputs.
"""

import io
from dataclasses import dataclass, field

import numpy as np

__all__ = ["WaveformRecord", "write_csv", "read_csv"]

_FLOAT_FMT = "{:.10g}"


def _unit_suffix(name):
    if name.startswith("I"):
        return "_A"
    return "_V"


@dataclass
class WaveformRecord:
    """Named uniformly-sampled channels plus originating-run metadata."""

    sample_period: float
    channels: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {len(v) for v in self.channels.values()}
        if len(lengths) > 1:
            raise ValueError(f"channel lengths differ: {sorted(lengths)}")
        if self.sample_period <= 0:
            raise ValueError("sample_period must be positive")

    @property
    def n_samples(self):
        return len(next(iter(self.channels.values()))) if self.channels else 0

    def time(self):
        t0 = float(self.metadata.get("t_start", 0.0))
        return t0 + self.sample_period * np.arange(self.n_samples)

    def channel(self, name):
        try:
            return np.asarray(self.channels[name])
        except KeyError:
            raise KeyError(
                f"no channel {name!r}; have {sorted(self.channels)}"
            ) from None


def write_csv(rec: WaveformRecord, path):
    names = list(rec.channels)
    cols = [rec.time()] + [np.asarray(rec.channels[n]) for n in names]
    header = ",".join(["time_s"] + [n + _unit_suffix(n) for n in names])
    buf = io.StringIO()
    buf.write(header + "\n")
    fmt = _FLOAT_FMT
    for row in zip(*cols):
        buf.write(",".join(fmt.format(x) for x in row) + "\n")
    with open(path, "w", newline="\n") as fh:
        fh.write(buf.getvalue())


def read_csv(path) -> WaveformRecord:
    with open(path) as fh:
        header = fh.readline().strip()
        names = header.split(",")
        if not names or names[0] != "time_s":
            raise ValueError(f"{path}: first column must be time_s")
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(names):
                raise ValueError(f"{path}: row {lineno} has {len(parts)} fields")
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise ValueError(f"{path}: row {lineno}: {exc}") from None
    data = np.array(rows)
    if len(data) < 2:
        raise ValueError(f"{path}: need at least two samples")
    t = data[:, 0]
    dt = float(t[1] - t[0])
    channels = {}
    for k, name in enumerate(names[1:], start=1):
        plain = name[:-2] if name.endswith(("_V", "_A")) else name
        channels[plain] = data[:, k]
    return WaveformRecord(sample_period=dt, channels=channels,
                          metadata={"t_start": float(t[0]), "source": str(path)})
