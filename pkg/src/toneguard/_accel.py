"""Hot numeric kernels: numba-jitted versions with pure-numpy fallbacks.

The backend is picked once at import from the ``TONEGUARD_NUMBA`` environment
variable: ``1`` forces the numba path (ImportError if numba is missing),
``0`` forces pure numpy, anything else (or unset) tries numba and silently
falls back. ``benchmarks/bench_kernels.py`` times both paths side by side.

FFTs stay on numpy either way; the kernels here cover the non-FFT inner
loops (sample-level tone synthesis, per-bin band power accumulation).
"""

from __future__ import annotations

import math
import os

import numpy as np

_TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# pure numpy implementations

def _np_synth_tone(n: int, amplitude: float, frequency: float, rate: float,
                   fade_n: int) -> np.ndarray:
    idx = np.arange(n, dtype=np.float64)
    out = amplitude * np.sin((_TWO_PI * frequency / rate) * idx)
    if fade_n > 0 and n > 0:
        m = min(fade_n, n)
        ramp = 0.5 * (1.0 - np.cos(math.pi * np.arange(m) / fade_n))
        out[:m] *= ramp
        out[n - m:] *= ramp[::-1]
    return out


def _np_band_powers(power: np.ndarray, gains: np.ndarray,
                    bounds: np.ndarray) -> np.ndarray:
    # bounds[b]..bounds[b+1] delimit the FFT bins of band b; cumsum keeps
    # empty bands at exactly zero.
    weighted = power * gains
    cs = np.concatenate(([0.0], np.cumsum(weighted)))
    return cs[bounds[1:]] - cs[bounds[:-1]]


# ---------------------------------------------------------------------------
# numba implementations (compiled lazily, cached on disk)

def _build_numba_kernels():
    from numba import njit

    @njit(cache=True)
    def synth_tone(n, amplitude, frequency, rate, fade_n):
        out = np.empty(n, dtype=np.float64)
        step = _TWO_PI * frequency / rate
        for i in range(n):
            s = amplitude * math.sin(step * i)
            if fade_n > 0:
                if i < fade_n:
                    s *= 0.5 * (1.0 - math.cos(math.pi * i / fade_n))
                j = n - 1 - i
                if j < fade_n:
                    s *= 0.5 * (1.0 - math.cos(math.pi * j / fade_n))
            out[i] = s
        return out

    @njit(cache=True)
    def band_powers(power, gains, bounds):
        n_bands = bounds.shape[0] - 1
        out = np.zeros(n_bands, dtype=np.float64)
        for b in range(n_bands):
            acc = 0.0
            for k in range(bounds[b], bounds[b + 1]):
                acc += power[k] * gains[k]
            out[b] = acc
        return out

    return synth_tone, band_powers


def _pick_backend():
    flag = os.environ.get("TONEGUARD_NUMBA", "auto").strip().lower()
    if flag in ("0", "false", "off", "no"):
        return False
    if flag in ("1", "true", "on", "yes"):
        _build_numba_kernels()  # raise early if numba is unusable
        return True
    try:
        import numba  # noqa: F401
        return True
    except ImportError:
        return False


USING_NUMBA = _pick_backend()

if USING_NUMBA:
    synth_tone, band_powers = _build_numba_kernels()
else:
    synth_tone, band_powers = _np_synth_tone, _np_band_powers


def backend_name() -> str:
    return "numba" if USING_NUMBA else "numpy"
