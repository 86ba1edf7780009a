"""Waveform post-processing: spectra, ripple, level census, settling time.

Harmonic magnitudes are computed over an integer number of fundamental
periods with a rectangular window, so harmonic bins are exact for periodic
steady state and no taper is needed.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NeverSettledError, WindowError, ZeroFundamentalError
from .waveform import WaveformRecord

__all__ = [
    "HarmonicSpectrum",
    "fourier_coefficients",
    "fundamental_rms",
    "triplen_content",
    "thd",
    "ripple_pp",
    "settling_time",
    "distinct_levels",
]


@dataclass(frozen=True)
class HarmonicSpectrum:
    """Magnitude/phase per integer harmonic order of fundamental_f."""

    fundamental_f: float
    dc: float
    entries: dict  # order m -> (magnitude, phase)

    def magnitude(self, m: int) -> float:
        if m == 0:
            return abs(self.dc)
        return self.entries[m][0]

    @property
    def max_order(self) -> int:
        return max(self.entries)


def _window(rec, f, cycles, start):
    n_per = 1.0 / (f * rec.sample_period)
    n_win = cycles * n_per
    n_win_i = int(round(n_win))
    if abs(n_win - n_win_i) > 1e-6 * n_win or n_win_i < 2:
        raise WindowError(
            f"{cycles} cycles of {f} Hz is {n_win} samples at "
            f"dt={rec.sample_period}; need an integer count"
        )
    total = rec.n_samples
    if start is None:
        i0 = total - n_win_i
    else:
        i0 = int(round((start - rec.metadata.get("t_start", 0.0))
                       / rec.sample_period))
    if i0 < 0 or i0 + n_win_i > total:
        raise WindowError(
            f"record holds {total} samples; window needs [{i0}, {i0 + n_win_i})"
        )
    return i0, n_win_i


def fourier_coefficients(rec: WaveformRecord, channel: str, f: float,
                         cycles: int, max_order: int | None = None,
                         start: float | None = None) -> HarmonicSpectrum:
    """Discrete Fourier projection of a channel over exactly `cycles` periods.

    By default the window is taken from the tail of the record (steady
    state); pass `start` to pin it. Magnitudes are single-sided peak
    values per harmonic order.
    """
    if cycles < 1:
        raise WindowError("cycles must be >= 1")
    x = rec.channel(channel)
    i0, n = _window(rec, f, cycles, start)
    seg = np.asarray(x[i0:i0 + n], dtype=float)
    spec = np.fft.rfft(seg)
    highest = (n // 2) // cycles
    if max_order is not None:
        highest = min(highest, max_order)
    entries = {}
    for m in range(1, highest + 1):
        c = spec[m * cycles]
        entries[m] = (2.0 * abs(c) / n, float(np.angle(c)))
    return HarmonicSpectrum(fundamental_f=f, dc=float(spec[0].real) / n,
                            entries=entries)


def fundamental_rms(spectrum: HarmonicSpectrum) -> float:
    return spectrum.magnitude(1) / math.sqrt(2.0)


def triplen_content(spectrum: HarmonicSpectrum, max_order: int) -> float:
    """RSS of harmonics at multiples of three, relative to the fundamental."""
    if max_order < 3:
        raise ValueError("max_order must be >= 3")
    fund = spectrum.magnitude(1)
    if fund == 0:
        raise ZeroFundamentalError("fundamental magnitude is zero")
    acc = sum(spectrum.magnitude(m) ** 2
              for m in range(3, max_order + 1, 3) if m in spectrum.entries)
    return math.sqrt(acc) / fund


def thd(spectrum: HarmonicSpectrum, max_order: int) -> float:
    """Total harmonic distortion over orders 2..max_order."""
    fund = spectrum.magnitude(1)
    if fund == 0:
        raise ZeroFundamentalError("fundamental magnitude is zero")
    acc = sum(spectrum.magnitude(m) ** 2
              for m in range(2, max_order + 1) if m in spectrum.entries)
    return math.sqrt(acc) / fund


def _tail_window(rec, window):
    n = rec.n_samples
    if isinstance(window, tuple):
        t0 = rec.metadata.get("t_start", 0.0)
        i0 = int(round((window[0] - t0) / rec.sample_period))
        i1 = int(round((window[1] - t0) / rec.sample_period))
    else:
        k = int(round(window / rec.sample_period))
        i0, i1 = n - k, n
    if i0 < 0 or i1 > n or i1 - i0 < 2:
        raise ValueError(f"window [{i0}:{i1}] outside record of {n} samples")
    return i0, i1


def ripple_pp(rec: WaveformRecord, channel: str, window):
    """(max - min, percent of mean) over a window.

    `window` is either a length in seconds (taken from the record tail) or
    an explicit (t_start, t_end) pair.
    """
    x = rec.channel(channel)
    i0, i1 = _tail_window(rec, window)
    seg = x[i0:i1]
    pp = float(seg.max() - seg.min())
    mean = float(seg.mean())
    pct = 100.0 * pp / mean if mean != 0 else math.inf
    return pp, pct


def settling_time(rec: WaveformRecord, channel: str, target: float,
                  band: float) -> float:
    """Earliest time after which the channel stays within target*(1 +- band%).

    Last-exit criterion: once returned, the channel never leaves the band
    again inside the record. Raises NeverSettledError otherwise.
    """
    if band <= 0:
        raise ValueError("band must be positive")
    x = rec.channel(channel)
    tol = abs(target) * band / 100.0
    outside = np.abs(x - target) > tol
    if outside[-1]:
        raise NeverSettledError(
            f"{channel} ends {abs(x[-1] - target):.3g} V from target "
            f"(band {tol:.3g} V)"
        )
    if not outside.any():
        return 0.0
    last_out = int(np.nonzero(outside)[0][-1])
    t0 = rec.metadata.get("t_start", 0.0)
    return t0 + (last_out + 1) * rec.sample_period


def distinct_levels(rec: WaveformRecord, channel: str, tol: float,
                    min_dwell: int = 3):
    """Dwell-weighted census of the flat levels a channel visits.

    Runs of at least `min_dwell` samples whose spread stays within `tol`
    are treated as dwells; dwell means are clustered by merging within
    `tol` and the dwell-weighted cluster centers are returned ascending.
    Transition samples never contribute.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = np.asarray(rec.channel(channel), dtype=float)
    # split into runs of near-constant value
    jump = np.abs(np.diff(x)) > tol / 2.0
    boundaries = np.flatnonzero(jump) + 1
    runs = np.split(x, boundaries)
    dwell_vals, dwell_wts = [], []
    for run in runs:
        if len(run) >= min_dwell and run.max() - run.min() <= tol:
            dwell_vals.append(run.mean())
            dwell_wts.append(len(run))
    if not dwell_vals:
        return []
    order = np.argsort(dwell_vals)
    vals = np.asarray(dwell_vals)[order]
    wts = np.asarray(dwell_wts, dtype=float)[order]
    centers, weights = [vals[0]], [wts[0]]
    for v, w in zip(vals[1:], wts[1:]):
        if v - centers[-1] <= tol:
            total = weights[-1] + w
            centers[-1] = (centers[-1] * weights[-1] + v * w) / total
            weights[-1] = total
        else:
            centers.append(v)
            weights.append(w)
    return [float(c) for c in centers]
