"""Third-octave-band math, band-resolved spectra, spectrograms, level sums.

Bands follow the base-10 definition: exact centers ``1000 * 10^(n/10)``,
edges a factor ``10^(1/20)`` either side, printed under their conventional
nominal labels (..., 50, 63, 80, ..., 12500, 16000, 20000, ...). Adjacent
bands tile the axis exactly: the upper edge of one is the lower edge of the
next.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from ._spectral import DEFAULT_WINDOW, hann_periodic, mean_square_to_dbfs, welch_psd
from .audio import AudioBuffer, CalibrationProfile, DEFAULT_CALIBRATION
from .errors import DomainError
from .weighting import SILENCE_FLOOR_DBFS, Weighting, gain_power

#: Nominal label mantissas for one decade of the base-10 series.
_NOMINAL_MANTISSAS = (1.0, 1.25, 1.6, 2.0, 2.5, 3.15, 4.0, 5.0, 6.3, 8.0)

#: Supported band indices relative to 1 kHz: 1 Hz up to 100 kHz nominal.
_INDEX_MIN, _INDEX_MAX = -30, 20

#: A band may only be reported if its upper edge stays below this fraction
#: of the sample rate (anti-aliasing margin).
ANTI_ALIAS_FACTOR = 0.45

_EDGE_RATIO = 10.0 ** (1.0 / 20.0)


def _nominal_from_index(n: int) -> float:
    d, r = divmod(n, 10)
    value = _NOMINAL_MANTISSAS[r] * 10.0 ** (3 + d)
    return round(value, 6)


_NOMINAL_BY_INDEX = {n: _nominal_from_index(n) for n in range(_INDEX_MIN, _INDEX_MAX + 1)}
_INDEX_BY_NOMINAL = {v: k for k, v in _NOMINAL_BY_INDEX.items()}


def _index_for_nominal(center) -> int:
    try:
        return _INDEX_BY_NOMINAL[round(float(center), 6)]
    except (KeyError, TypeError, ValueError):
        raise DomainError(
            f"{center!r} is not a nominal third-octave center"
        ) from None


def exact_center(nominal) -> float:
    """Exact base-10 center frequency behind a nominal label."""
    return 1000.0 * 10.0 ** (_index_for_nominal(nominal) / 10.0)


def band_edges(center) -> tuple[float, float]:
    """(lo, hi) edge frequencies of a nominal band; hi/lo == 10^(1/10)."""
    fc = exact_center(center)
    return fc / _EDGE_RATIO, fc * _EDGE_RATIO


def tob_centers(lo: float, hi: float) -> list[float]:
    """Nominal centers with label in [lo, hi], ascending."""
    if not (0.0 < lo <= hi):
        raise DomainError(f"need 0 < lo <= hi, got ({lo}, {hi})")
    return [
        _NOMINAL_BY_INDEX[n]
        for n in range(_INDEX_MIN, _INDEX_MAX + 1)
        if lo <= _NOMINAL_BY_INDEX[n] <= hi
    ]


def band_for_frequency(f: float) -> float:
    """Nominal center of the band whose [lo, hi) interval contains ``f``."""
    if not (f > 0.0 and np.isfinite(f)):
        raise DomainError("frequency must be positive and finite")
    n = math.floor(10.0 * math.log10(f / 1000.0) + 0.5)
    # guard against log rounding right at an edge
    while n < _INDEX_MAX and f >= 1000.0 * 10.0 ** ((n + 0.5) / 10.0):
        n += 1
    while n > _INDEX_MIN and f < 1000.0 * 10.0 ** ((n - 0.5) / 10.0):
        n -= 1
    if not _INDEX_MIN <= n <= _INDEX_MAX:
        raise DomainError(f"{f} Hz is outside the supported band series")
    lo, hi = band_edges(_NOMINAL_BY_INDEX[n])
    if not lo <= f < hi:
        raise DomainError(f"{f} Hz is outside the supported band series")
    return _NOMINAL_BY_INDEX[n]


def max_center_for_rate(sample_rate: int) -> float:
    """Highest nominal center whose band is fully below the aliasing margin."""
    limit = ANTI_ALIAS_FACTOR * sample_rate
    best = None
    for n in range(_INDEX_MIN, _INDEX_MAX + 1):
        hi = 1000.0 * 10.0 ** (n / 10.0) * _EDGE_RATIO
        if hi <= limit:
            best = _NOMINAL_BY_INDEX[n]
    if best is None:
        raise DomainError(f"sample rate {sample_rate} is too low for any band")
    return best


def combine_levels(levels) -> float:
    """Incoherent power sum of dB levels: 10*log10(sum 10^(L/10))."""
    arr = np.asarray(list(levels), dtype=np.float64)
    if arr.size == 0:
        raise DomainError("need at least one level to combine")
    if not np.all(np.isfinite(arr)):
        raise DomainError("levels must be finite")
    ref = arr.max()
    return float(ref + 10.0 * np.log10(np.sum(10.0 ** ((arr - ref) / 10.0))))


@dataclass
class ThirdOctaveSpectrum:
    """Per-band Leq levels under one weighting and calibration.

    ``bands`` maps nominal center (Hz) to level (dB SPL), ascending;
    ``metadata`` carries analysis warnings (clipping) and the out-of-range
    residual levels that fall below the lowest / above the highest band.
    """

    bands: dict[float, float]
    weighting: Weighting
    duration_s: float
    calibration_db: float
    metadata: dict = field(default_factory=dict)

    def level(self, center) -> float:
        key = round(float(center), 6)
        if key not in self.bands:
            raise DomainError(f"band {center} not present in spectrum")
        return self.bands[key]

    def to_dict(self) -> dict:
        return {
            "weighting": self.weighting.label,
            "duration_s": self.duration_s,
            "calibration_db": self.calibration_db,
            "bands": [
                {"center_hz": c, "level_db": l} for c, l in self.bands.items()
            ],
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ThirdOctaveSpectrum":
        from .weighting import parse_weighting

        bands = {
            round(float(row["center_hz"]), 6): float(row["level_db"])
            for row in payload["bands"]
        }
        for center in bands:
            _index_for_nominal(center)
        return cls(
            bands=dict(sorted(bands.items())),
            weighting=parse_weighting(payload["weighting"]),
            duration_s=float(payload["duration_s"]),
            calibration_db=float(payload["calibration_db"]),
            metadata=dict(payload.get("metadata", {})),
        )

    def to_csv(self) -> str:
        lines = ["center_hz,level_db"]
        lines += [f"{c:g},{l:.4f}" for c, l in self.bands.items()]
        return "\n".join(lines) + "\n"


def _check_resolution(lowest_center, delta_f: float, rate: int, win: int) -> None:
    lo_edge, hi_edge = band_edges(lowest_center)
    width = hi_edge - lo_edge
    if width < 2.0 * delta_f:
        need = math.ceil(2.0 * rate / width)
        raise DomainError(
            f"band {lowest_center:g} Hz is {width:.2f} Hz wide and needs a window "
            f"of >= {need} samples ({need / rate:.2f} s at {rate} Hz); got {win}"
        )


def band_spectrum(buffer: AudioBuffer, kind: Weighting,
                  cal: CalibrationProfile = DEFAULT_CALIBRATION,
                  lo: float = 10.0, hi: float | None = None,
                  window_length: int = DEFAULT_WINDOW,
                  hop: int | None = None) -> ThirdOctaveSpectrum:
    """Welch-averaged third-octave Leq spectrum over [lo, hi] nominal centers.

    ``hi=None`` selects the highest band the sample rate supports. Energy
    outside the requested bands is reported in ``metadata['residual_below_db']``
    / ``['residual_above_db']``, never dropped silently.
    """
    rate = buffer.sample_rate
    rate_cap = max_center_for_rate(rate)
    if hi is None:
        hi = rate_cap
    centers = tob_centers(lo, hi)
    if not centers:
        raise DomainError(f"no nominal centers inside [{lo}, {hi}] Hz")
    if exact_center(centers[-1]) * _EDGE_RATIO > ANTI_ALIAS_FACTOR * rate:
        raise DomainError(
            f"band {centers[-1]:g} Hz exceeds the anti-aliasing margin at "
            f"{rate} Hz (highest safe band: {rate_cap:g} Hz); "
            f"raise the sample rate to at least "
            f"{math.ceil(exact_center(centers[-1]) * _EDGE_RATIO / ANTI_ALIAS_FACTOR)} Hz"
        )

    freqs, psd, delta_f, _ = welch_psd(buffer, window_length, hop)
    win = min(int(window_length), len(buffer))
    _check_resolution(centers[0], delta_f, rate, win)

    edges = np.array(
        [band_edges(centers[0])[0]] + [band_edges(c)[1] for c in centers]
    )
    bounds = np.searchsorted(freqs, edges, side="left").astype(np.int64)
    gains = gain_power(kind, freqs)
    powers = _accel.band_powers(psd * delta_f, gains, bounds)

    floor = SILENCE_FLOOR_DBFS + cal.fullscale_spl_db
    bands: dict[float, float] = {}
    for center, p in zip(centers, powers):
        dbfs, _ = mean_square_to_dbfs(float(p), SILENCE_FLOOR_DBFS)
        bands[center] = dbfs + cal.fullscale_spl_db

    weighted = psd * delta_f * gains
    below = float(weighted[(freqs > 0) & (freqs < edges[0])].sum())
    above = float(weighted[freqs >= edges[-1]].sum())
    metadata = {
        "residual_below_db": mean_square_to_dbfs(below, SILENCE_FLOOR_DBFS)[0]
        + cal.fullscale_spl_db,
        "residual_above_db": mean_square_to_dbfs(above, SILENCE_FLOOR_DBFS)[0]
        + cal.fullscale_spl_db,
        "floor_db": floor,
    }
    if buffer.clipped:
        metadata["clipped_input"] = True

    return ThirdOctaveSpectrum(
        bands=bands,
        weighting=kind,
        duration_s=buffer.duration_s,
        calibration_db=cal.fullscale_spl_db,
        metadata=metadata,
    )


@dataclass
class SpectrogramMatrix:
    """Short-time magnitude spectra in dB (frames x bins)."""

    frames: np.ndarray
    hop_s: float
    bin_hz: float

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    def frame_times(self) -> np.ndarray:
        return np.arange(self.n_frames) * self.hop_s


def spectrogram(buffer: AudioBuffer, window_length: int = 4096,
                hop: int | None = None) -> SpectrogramMatrix:
    """Hann-windowed STFT magnitude in dB relative to a full-scale sine peak.

    Frame count is floor((N - window) / hop) + 1; buffers shorter than one
    window are an error.
    """
    if window_length < 256:
        raise DomainError("spectrogram window must be >= 256 samples")
    hop = window_length // 2 if hop is None else int(hop)
    if hop < 1:
        raise DomainError("hop must be >= 1")
    n = len(buffer)
    if n < window_length:
        raise DomainError(
            f"buffer of {n} samples is shorter than one {window_length}-sample window"
        )
    w = hann_periodic(window_length)
    scale = 2.0 / w.sum()  # unit-amplitude on-bin sine peaks at 0 dB
    n_frames = (n - window_length) // hop + 1
    starts = np.arange(n_frames) * hop
    segs = np.lib.stride_tricks.sliding_window_view(buffer.samples, window_length)[starts]
    mags = np.abs(np.fft.rfft(segs * w, axis=1)) * scale
    db = 20.0 * np.log10(np.maximum(mags, 10.0 ** (SILENCE_FLOOR_DBFS / 20.0)))
    return SpectrogramMatrix(
        frames=db,
        hop_s=hop / buffer.sample_rate,
        bin_hz=buffer.sample_rate / window_length,
    )
