"""Stimulus synthesis: sine tones, the track-injection transform, noise.

Tones start at phase 0 and carry raised-cosine fades (default 50 ms) so the
onset does not splatter broadband energy into leakage measurements. Output
is deterministic: identical specs produce bit-identical buffers under a
given kernel backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from .audio import AudioBuffer, CalibrationProfile, DEFAULT_CALIBRATION
from .errors import ContractError, DomainError


@dataclass(frozen=True)
class ToneSpec:
    """A pure-tone stimulus description."""

    frequency: float
    duration_s: float
    amplitude: float = 1.0
    sample_rate: int = 44100
    fade_ms: float = 50.0

    def __post_init__(self):
        if self.sample_rate <= 0 or int(self.sample_rate) != self.sample_rate:
            raise DomainError("sample_rate must be a positive integer")
        if not 0.0 < self.frequency < self.sample_rate / 2.0:
            raise DomainError(
                f"frequency {self.frequency} Hz must sit below the Nyquist "
                f"frequency {self.sample_rate / 2:g} Hz; raise the sample rate"
            )
        if self.duration_s <= 0.0:
            raise DomainError("duration_s must be positive")
        if not 0.0 < self.amplitude <= 1.0:
            raise DomainError("amplitude must lie in (0, 1]")
        if self.fade_ms < 0.0:
            raise DomainError("fade_ms must be >= 0")

    @property
    def n_samples(self) -> int:
        return round(self.duration_s * self.sample_rate)

    @property
    def fade_samples(self) -> int:
        return int(round(self.fade_ms * self.sample_rate / 1000.0))


def generate_tone(spec: ToneSpec) -> AudioBuffer:
    """Synthesize ``amplitude * sin(2*pi*f*n/rate)`` with raised-cosine fades."""
    n = spec.n_samples
    fade = min(spec.fade_samples, n // 2)
    samples = _accel.synth_tone(
        n, float(spec.amplitude), float(spec.frequency),
        float(spec.sample_rate), fade,
    )
    return AudioBuffer(samples=samples, sample_rate=spec.sample_rate)


def amplitude_for_spl(target_spl_db: float,
                      cal: CalibrationProfile = DEFAULT_CALIBRATION) -> float:
    """Sine amplitude whose calibrated Leq equals ``target_spl_db``.

    The calibration anchors a full-scale sine at ``cal.fullscale_spl_db``,
    so the mapping is a plain dB offset. Targets above the anchor would
    need amplitude > 1 and raise.
    """
    amp = 10.0 ** ((target_spl_db - cal.fullscale_spl_db) / 20.0)
    if amp > 1.0:
        raise DomainError(
            f"{target_spl_db} dB SPL needs amplitude {amp:.3f} > 1; "
            f"raise the calibration anchor ({cal.fullscale_spl_db} dB)"
        )
    return amp


def inject_tone(track: AudioBuffer, spec: ToneSpec,
                track_attenuation_db: float = 0.0) -> AudioBuffer:
    """Attenuate ``track`` and mix in the tone, sample-aligned from t=0.

    The tone is padded/truncated to the track length. If the mix would
    clip, raises ContractError reporting the headroom shortfall instead of
    wrapping or limiting.
    """
    if spec.sample_rate != track.sample_rate:
        raise ContractError(
            f"tone rate {spec.sample_rate} != track rate {track.sample_rate}"
        )
    if track_attenuation_db < 0.0:
        raise DomainError("track_attenuation_db must be >= 0")

    tone = generate_tone(spec).samples
    n = len(track)
    if tone.shape[0] < n:
        tone = np.concatenate([tone, np.zeros(n - tone.shape[0])])
    else:
        tone = tone[:n]

    mixed = track.samples * 10.0 ** (-track_attenuation_db / 20.0) + tone
    peak = float(np.max(np.abs(mixed))) if n else 0.0
    if peak > 1.0:
        over_db = 20.0 * math.log10(peak)
        raise ContractError(
            f"mix peaks at {peak:.4f} ({over_db:.2f} dB over full scale); "
            f"lower the tone amplitude or attenuate the track by at least "
            f"{over_db:.2f} dB more"
        )
    return AudioBuffer(samples=mixed, sample_rate=track.sample_rate)


def dither_pcm16(buffer: AudioBuffer, seed: int = 0x5EED) -> AudioBuffer:
    """Add seeded TPDF dither (+-1 LSB at 16 bits) ahead of pcm16 export."""
    rng = np.random.default_rng(seed)
    lsb = 1.0 / 32768.0
    noise = (rng.random(len(buffer)) - rng.random(len(buffer))) * lsb
    return AudioBuffer(
        samples=np.clip(buffer.samples + noise, -1.0, 1.0),
        sample_rate=buffer.sample_rate,
    )


def pink_noise(duration_s: float, sample_rate: int = 44100,
               band: tuple[float, float] = (20.0, 20000.0),
               rms: float = 0.1, seed: int = 0) -> AudioBuffer:
    """Band-limited pink (1/f power) noise fixture.

    Synthesized by shaping a random spectrum and inverse-transforming, so
    the result is exactly zero outside ``band``. Useful as program material
    and for power-accounting checks.
    """
    if duration_s <= 0:
        raise DomainError("duration_s must be positive")
    lo, hi = band
    if not 0.0 < lo < hi <= sample_rate / 2.0:
        raise DomainError(f"band {band} must satisfy 0 < lo < hi <= Nyquist")

    n = round(duration_s * sample_rate)
    freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate)
    rng = np.random.default_rng(seed)
    shape = np.zeros(freqs.shape[0])
    sel = (freqs >= lo) & (freqs <= hi)
    shape[sel] = 1.0 / np.sqrt(freqs[sel])
    phases = np.exp(2j * np.pi * rng.random(freqs.shape[0]))
    spectrum = shape * phases
    samples = np.fft.irfft(spectrum, n=n)
    cur = float(np.sqrt(np.mean(samples ** 2)))
    if cur > 0.0:
        samples *= rms / cur
    peak = float(np.max(np.abs(samples)))
    if peak > 1.0:
        samples /= peak * 1.001
    return AudioBuffer(samples=samples, sample_rate=sample_rate)
