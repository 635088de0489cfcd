"""WAV ingestion/emission and the digital-to-acoustic calibration mapping.

Levels inside the package are dBFS with 0 dBFS defined as the RMS of a
full-scale sine; a :class:`CalibrationProfile` shifts them onto the dB SPL
scale (full-scale sine == ``fullscale_spl_db``, 94 dB SPL by default, the
standard acoustic-calibrator level at 1 kHz).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UnsupportedFormatError, WavParseError

#: Reference pressure for dB SPL, 20 micropascals.
REFERENCE_PRESSURE_PA = 20e-6

#: Full-scale int16 magnitude used for encode/decode scaling.
_PCM16_SCALE = 32768.0

_FORMAT_PCM = 0x0001
_FORMAT_IEEE_FLOAT = 0x0003
_FORMAT_EXTENSIBLE = 0xFFFE


@dataclass(frozen=True)
class CalibrationProfile:
    """Anchor between digital full scale and sound pressure level.

    ``fullscale_spl_db`` is the dB SPL assigned to a full-scale (amplitude
    1.0) sine, i.e. to 0 dBFS. ``reference_pressure_pa`` is the fixed
    20 uPa reference implied by every dB SPL figure; it is carried for
    documentation and is not a tunable.
    """

    fullscale_spl_db: float = 94.0
    reference_pressure_pa: float = REFERENCE_PRESSURE_PA

    def __post_init__(self):
        if not np.isfinite(self.fullscale_spl_db):
            raise DomainError("calibration level must be finite")


DEFAULT_CALIBRATION = CalibrationProfile()


def dbfs_to_dbspl(level_dbfs: float, cal: CalibrationProfile) -> float:
    """Map a dBFS level (0 dBFS = full-scale sine RMS) to dB SPL."""
    if not np.isfinite(level_dbfs):
        raise DomainError("level must be finite")
    return level_dbfs + cal.fullscale_spl_db


@dataclass
class AudioBuffer:
    """Mono sample sequence in [-1, 1] full-scale units plus its sample rate.

    ``clipped`` is set by the decoder when the source material contains
    full-scale runs or out-of-range float samples; analysis copies it into
    report metadata as a warning, it is never an error.
    """

    samples: np.ndarray
    sample_rate: int
    clipped: bool = field(default=False, compare=False)

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise DomainError("AudioBuffer samples must be one-dimensional")
        if not np.all(np.isfinite(arr)):
            raise DomainError("AudioBuffer samples must be finite")
        self.samples = arr
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise DomainError("sample_rate must be a positive integer")
        self.sample_rate = int(self.sample_rate)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return self.samples.shape[0] / self.sample_rate


def _detect_clipping(samples: np.ndarray) -> bool:
    # Two or more consecutive samples at (or beyond) full scale.
    hot = np.abs(samples) >= 1.0 - 1.0 / _PCM16_SCALE
    return bool(np.any(hot[1:] & hot[:-1]))


def read_wav(path, channel: int = 0, mixdown: bool = False) -> AudioBuffer:
    """Decode a RIFF/WAVE file into an :class:`AudioBuffer`.

    Supports 16-bit integer and 32-bit IEEE-float PCM (plain or
    WAVE_FORMAT_EXTENSIBLE), 1..8 channels. Returns ``channel`` (default
    first); ``mixdown=True`` averages all channels with equal weight
    instead. Channels are never mixed unless explicitly requested.

    Raises
    ------
    WavParseError
        Malformed container; the message names the byte offset.
    UnsupportedFormatError
        Valid container with a codec/layout outside the above.
    """
    with open(path, "rb") as fh:
        blob = fh.read()

    if len(blob) < 12:
        raise WavParseError("file too short for a RIFF header", offset=0)
    if blob[0:4] != b"RIFF":
        raise WavParseError("missing RIFF magic", offset=0)
    if blob[8:12] != b"WAVE":
        raise WavParseError("RIFF form type is not WAVE", offset=8)

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(blob):
        chunk_id = blob[pos:pos + 4]
        (chunk_size,) = struct.unpack_from("<I", blob, pos + 4)
        body_start = pos + 8
        if body_start + chunk_size > len(blob):
            raise WavParseError(
                f"chunk {chunk_id!r} declares {chunk_size} bytes but the file ends early",
                offset=pos,
            )
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                raise WavParseError("fmt chunk shorter than 16 bytes", offset=pos)
            fmt = struct.unpack_from("<HHIIHH", blob, body_start)
            if fmt[0] == _FORMAT_EXTENSIBLE:
                if chunk_size < 40:
                    raise WavParseError("extensible fmt chunk truncated", offset=pos)
                (sub_tag,) = struct.unpack_from("<H", blob, body_start + 24)
                fmt = (sub_tag,) + fmt[1:]
        elif chunk_id == b"data":
            data = (body_start, chunk_size)
        pos = body_start + chunk_size + (chunk_size & 1)

    if fmt is None:
        raise WavParseError("no fmt chunk found", offset=12)
    if data is None:
        raise WavParseError("no data chunk found", offset=12)

    tag, n_channels, rate, _byte_rate, block_align, bits = fmt
    if not 1 <= n_channels <= 8:
        raise UnsupportedFormatError(f"{n_channels} channels unsupported (1..8)")
    if tag == _FORMAT_PCM and bits == 16:
        dtype, bytes_per = np.dtype("<i2"), 2
    elif tag == _FORMAT_IEEE_FLOAT and bits == 32:
        dtype, bytes_per = np.dtype("<f4"), 4
    else:
        raise UnsupportedFormatError(
            f"format tag {tag}/{bits}-bit unsupported (want 16-bit PCM or 32-bit float)"
        )
    frame_bytes = bytes_per * n_channels
    if block_align not in (0, frame_bytes):
        raise WavParseError(
            f"block align {block_align} does not match {frame_bytes}-byte frames"
        )

    start, size = data
    if size % frame_bytes:
        raise WavParseError(
            f"data chunk size {size} is not a whole number of frames", offset=start - 8
        )
    raw = np.frombuffer(blob, dtype=dtype, count=size // bytes_per, offset=start)
    frames = raw.reshape(-1, n_channels)

    if mixdown:
        picked = frames.astype(np.float64).mean(axis=1)
    else:
        if not 0 <= channel < n_channels:
            raise DomainError(f"channel {channel} out of range (file has {n_channels})")
        picked = frames[:, channel].astype(np.float64)

    if dtype.kind == "i":
        samples = picked / _PCM16_SCALE
        clipped = _detect_clipping(samples)
    else:
        clipped = bool(np.any(np.abs(picked) > 1.0)) or _detect_clipping(picked)
        samples = np.clip(picked, -1.0, 1.0)

    return AudioBuffer(samples=samples, sample_rate=int(rate), clipped=clipped)


def write_wav(buffer: AudioBuffer, path, fmt: str = "float32") -> None:
    """Encode ``buffer`` as mono RIFF/WAVE, ``fmt`` one of pcm16|float32.

    float32 is lossless; pcm16 rounds to the nearest step (error at most
    1/32768 per sample, no dither -- see synth.dither_pcm16 for opt-in TPDF
    dither ahead of quantization).
    """
    if fmt == "pcm16":
        tag, bits = _FORMAT_PCM, 16
        q = np.round(buffer.samples * _PCM16_SCALE)
        payload = np.clip(q, -32768, 32767).astype("<i2").tobytes()
    elif fmt == "float32":
        tag, bits = _FORMAT_IEEE_FLOAT, 32
        payload = buffer.samples.astype("<f4").tobytes()
    else:
        raise DomainError(f"unknown wav format {fmt!r} (pcm16|float32)")

    rate = buffer.sample_rate
    block_align = bits // 8
    header = struct.pack(
        "<HHIIHH", tag, 1, rate, rate * block_align, block_align, bits
    )
    chunks = [(b"fmt ", header)]
    if tag == _FORMAT_IEEE_FLOAT:
        chunks.append((b"fact", struct.pack("<I", len(buffer))))
    chunks.append((b"data", payload))

    body = bytearray(b"WAVE")
    for cid, cbody in chunks:
        body += cid + struct.pack("<I", len(cbody)) + cbody
        if len(cbody) & 1:
            body += b"\x00"
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", len(body)) + bytes(body))
