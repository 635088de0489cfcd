"""Frequency-weighting curves (Z, A, high-pass) and calibrated Leq.

Weightings are applied in the frequency domain as gain masks on FFT bins,
so the realized curve is exact at bin centers; there is no bilinear-warped
time-domain filter. The A curve is the IEC 61672 analytic response
normalized to 0 dB at 1 kHz. Z is unity gain. "hp" is a documented
high-pass substitute for proprietary extended-ultrasonic meter weightings:
unity at and above its cutoff, 24 dB/octave below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._spectral import DEFAULT_WINDOW, mean_square_to_dbfs, welch_psd
from .audio import AudioBuffer, CalibrationProfile, DEFAULT_CALIBRATION, dbfs_to_dbspl
from .errors import DomainError

#: Reported levels never fall below this (dBFS, before the calibration offset).
SILENCE_FLOOR_DBFS = -120.0

#: IEC 61672 A-weighting pole frequencies (Hz).
_A_F1 = 20.598997
_A_F2 = 107.65265
_A_F3 = 737.86223
_A_F4 = 12194.217

_HP_ORDER = 4  # 24 dB/octave

_HP_CUTOFF_RANGE = (10000.0, 22000.0)
DEFAULT_HP_CUTOFF = 16000.0


@dataclass(frozen=True)
class Weighting:
    """A weighting curve selector: kind ``z``, ``a``, or ``hp`` (with cutoff)."""

    kind: str
    cutoff_hz: float | None = None

    def __post_init__(self):
        if self.kind not in ("z", "a", "hp"):
            raise DomainError(f"unknown weighting kind {self.kind!r}")
        if self.kind == "hp":
            c = self.cutoff_hz
            if c is None or not (_HP_CUTOFF_RANGE[0] <= c <= _HP_CUTOFF_RANGE[1]):
                raise DomainError(
                    f"hp cutoff must lie in {_HP_CUTOFF_RANGE} Hz, got {c}"
                )
        elif self.cutoff_hz is not None:
            raise DomainError(f"weighting {self.kind!r} takes no cutoff")

    @property
    def label(self) -> str:
        if self.kind == "hp":
            return f"hp:{self.cutoff_hz:g}"
        return self.kind


Z = Weighting("z")
A = Weighting("a")


def high_pass(cutoff_hz: float = DEFAULT_HP_CUTOFF) -> Weighting:
    return Weighting("hp", float(cutoff_hz))


def parse_weighting(text: str) -> Weighting:
    """Parse the CLI grammar ``z | a | hp[:cutoff]``."""
    t = text.strip().lower()
    if t in ("z", "a"):
        return Weighting(t)
    if t == "hp":
        return high_pass()
    if t.startswith("hp:"):
        try:
            cutoff = float(t[3:])
        except ValueError:
            raise DomainError(f"bad hp cutoff in {text!r}") from None
        return high_pass(cutoff)
    raise DomainError(f"unknown weighting {text!r} (expected z|a|hp[:cutoff])")


def _a_weighting_db(f: np.ndarray) -> np.ndarray:
    f2 = f * f
    num = (_A_F4 ** 2) * f2 * f2
    den = (
        (f2 + _A_F1 ** 2)
        * np.sqrt((f2 + _A_F2 ** 2) * (f2 + _A_F3 ** 2))
        * (f2 + _A_F4 ** 2)
    )
    return 20.0 * np.log10(num / den)


_A_OFFSET_DB = float(_a_weighting_db(np.array([1000.0]))[0])


def weighting_gain_db(kind: Weighting, frequency) -> float | np.ndarray:
    """Gain of the weighting curve at ``frequency`` Hz (scalar or array).

    A is normalized so A(1000) == 0 exactly; Z is 0 everywhere; hp is 0 at
    and above its cutoff and falls 24 dB/octave below it.
    """
    f = np.asarray(frequency, dtype=np.float64)
    scalar = f.ndim == 0
    f = np.atleast_1d(f)
    if np.any(f <= 0.0) or not np.all(np.isfinite(f)):
        raise DomainError("frequency must be positive and finite")

    if kind.kind == "z":
        out = np.zeros_like(f)
    elif kind.kind == "a":
        out = _a_weighting_db(f) - _A_OFFSET_DB
    else:
        out = np.minimum(0.0, 20.0 * _HP_ORDER * np.log10(f / kind.cutoff_hz))
    return float(out[0]) if scalar else out


def gain_power(kind: Weighting, freqs: np.ndarray) -> np.ndarray:
    """Linear power gains for an FFT frequency axis; the DC bin gets zero."""
    gains = np.zeros_like(freqs)
    pos = freqs > 0.0
    gains[pos] = 10.0 ** (weighting_gain_db(kind, freqs[pos]) / 10.0)
    return gains


@dataclass(frozen=True)
class LeqResult:
    """Equivalent continuous level over a buffer, dB SPL when calibrated."""

    level_db: float
    weighting: Weighting
    duration_s: float
    at_floor: bool = False


def compute_leq(buffer: AudioBuffer, kind: Weighting,
                cal: CalibrationProfile = DEFAULT_CALIBRATION,
                window_length: int = DEFAULT_WINDOW,
                hop: int | None = None) -> LeqResult:
    """Weighted Leq of the whole buffer.

    Leq = 10*log10(mean weighted squared pressure / reference^2), expressed
    in dB SPL via the calibration profile; an all-zero buffer reports the
    silence floor rather than raising.
    """
    freqs, psd, delta_f, _ = welch_psd(buffer, window_length, hop)
    mean_square = float(np.dot(gain_power(kind, freqs), psd) * delta_f)
    dbfs, at_floor = mean_square_to_dbfs(mean_square, SILENCE_FLOOR_DBFS)
    return LeqResult(
        level_db=dbfs_to_dbspl(dbfs, cal),
        weighting=kind,
        duration_s=buffer.duration_s,
        at_floor=at_floor,
    )
