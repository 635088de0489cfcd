"""Shared Welch power-spectral-density estimation.

One code path feeds both the total Leq and the per-band spectra so that the
power sum over bands reconciles with the total level by construction.
"""

from __future__ import annotations

import numpy as np

from .audio import AudioBuffer
from .errors import DomainError

#: Default analysis window (samples). At 44.1 kHz this is ~1.49 s, enough to
#: keep leakage between adjacent low-frequency third-octave bands negligible.
DEFAULT_WINDOW = 65536

#: Mean square of a full-scale sine; 0 dBFS reference.
FULLSCALE_SINE_MSQ = 0.5


def hann_periodic(n: int) -> np.ndarray:
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def welch_psd(buffer: AudioBuffer, window_length: int = DEFAULT_WINDOW,
              hop: int | None = None):
    """One-sided Welch PSD of the buffer, Hann window, density scaling.

    Returns ``(freqs, psd, delta_f, n_frames)`` with the property that
    ``psd.sum() * delta_f`` estimates the signal's mean square. Buffers
    shorter than ``window_length`` are analyzed as a single full-length
    segment.
    """
    n = len(buffer)
    if n == 0:
        raise DomainError("cannot analyze an empty buffer")
    if window_length < 16:
        raise DomainError("window_length must be at least 16 samples")
    win = min(int(window_length), n)
    step = win // 2 if hop is None else int(hop)
    if step < 1:
        raise DomainError("hop must be positive")

    w = hann_periodic(win)
    u = float(np.dot(w, w))
    n_frames = (n - win) // step + 1
    starts = np.arange(n_frames) * step
    frames = np.lib.stride_tricks.sliding_window_view(buffer.samples, win)[starts]
    spec = np.fft.rfft(frames * w, axis=1)
    power = (spec.real ** 2 + spec.imag ** 2).mean(axis=0)
    power[1:] *= 2.0
    if win % 2 == 0:
        power[-1] *= 0.5

    rate = buffer.sample_rate
    psd = power / (rate * u)
    delta_f = rate / win
    freqs = np.arange(power.shape[0]) * delta_f
    return freqs, psd, delta_f, n_frames


def mean_square_to_dbfs(mean_square: float, floor_dbfs: float) -> tuple[float, bool]:
    """Convert a weighted mean square to dBFS, clamped at the silence floor."""
    if mean_square <= 0.0:
        return floor_dbfs, True
    level = 10.0 * np.log10(mean_square / FULLSCALE_SINE_MSQ)
    if level < floor_dbfs:
        return floor_dbfs, True
    return float(level), False
