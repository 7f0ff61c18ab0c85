"""Typed media tensors with bit-exact file I/O.

Images are (C,H,W) float arrays in [0,1], audio is a flat float array in
[-1,1]. The only on-disk formats are binary PPM (P6, maxval 255) and mono
PCM16 WAV; both parsers key off magic bytes, never file extensions.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    IoFailure,
    MalformedHeader,
    ShapeMismatch,
    TruncatedData,
    TruncatedPixelData,
    UnsupportedEncoding,
    UnsupportedMaxval,
)

IMAGE = "image"
AUDIO = "audio"

FORMAT_PPM = "ppm_p6"
FORMAT_WAV = "wav_pcm16_mono"

DEFAULT_SAMPLE_RATE = 44100


@dataclass(frozen=True)
class MediaTensor:
    """Immutable media value: an image (C,H,W) in [0,1] or audio (N,) in [-1,1]."""

    kind: str
    data: np.ndarray
    sample_rate: int = DEFAULT_SAMPLE_RATE  # audio metadata, unused by the math

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64)
        if self.kind == IMAGE:
            if arr.ndim != 3 or arr.shape[0] not in (1, 3):
                raise ShapeMismatch(f"image tensor must be (C,H,W) with C in {{1,3}}, got {arr.shape}")
        elif self.kind == AUDIO:
            if arr.ndim != 1 or arr.shape[0] < 1:
                raise ShapeMismatch(f"audio tensor must be non-empty 1-D, got {arr.shape}")
        else:
            raise ShapeMismatch(f"unknown media kind {self.kind!r}")
        lo, hi = value_range(self.kind)
        if arr.size and (arr.min() < lo or arr.max() > hi):
            raise ShapeMismatch(
                f"{self.kind} values outside [{lo}, {hi}]: min {arr.min():g}, max {arr.max():g}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def with_data(self, data: np.ndarray) -> "MediaTensor":
        """Same kind and metadata, new (already in-range) values."""
        return MediaTensor(self.kind, data, self.sample_rate)


def value_range(kind: str) -> tuple[float, float]:
    return (0.0, 1.0) if kind == IMAGE else (-1.0, 1.0)


def image(data: np.ndarray) -> MediaTensor:
    return MediaTensor(IMAGE, data)


def audio(data: np.ndarray, sample_rate: int = DEFAULT_SAMPLE_RATE) -> MediaTensor:
    return MediaTensor(AUDIO, data, sample_rate)


def clamp_to_range(t: MediaTensor) -> MediaTensor:
    """Project every element onto the media's valid range."""
    lo, hi = value_range(t.kind)
    return t.with_data(np.clip(t.data, lo, hi))


def clamped(kind: str, data: np.ndarray, sample_rate: int = DEFAULT_SAMPLE_RATE) -> MediaTensor:
    """Construct a tensor from unconstrained values, clamping into range."""
    lo, hi = value_range(kind)
    return MediaTensor(kind, np.clip(data, lo, hi), sample_rate)


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5)


@dataclass(frozen=True)
class MediaPath:
    """A media file location plus its magic-byte-sniffed format."""

    path: str
    format: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "format", sniff_format(self.path))


def sniff_format(path: str) -> str:
    try:
        with open(path, "rb") as fh:
            magic = fh.read(4)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if magic[:2] == b"P6":
        return FORMAT_PPM
    if magic == b"RIFF":
        return FORMAT_WAV
    raise MalformedHeader(f"{path}: unrecognized magic bytes {magic!r}")


def load_media(path: str) -> MediaTensor:
    """Load either supported format, dispatching on magic bytes."""
    return load_image(path) if sniff_format(path) == FORMAT_PPM else load_audio(path)


def save_media(t: MediaTensor, path: str) -> None:
    if t.kind == IMAGE:
        save_image(t, path)
    else:
        save_audio(t, path)


# --- PPM P6 ---

def _read_ppm_token(data: bytes, pos: int) -> tuple[bytes, int]:
    while pos < len(data) and data[pos : pos + 1].isspace():
        pos += 1
    start = pos
    while pos < len(data) and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise MalformedHeader("unexpected end of header")
    return data[start:pos], pos


def load_image(path: str) -> MediaTensor:
    """Parse a binary PPM (P6, maxval 255); bytes map to values b/255."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc

    if raw[:2] != b"P6":
        raise MalformedHeader(f"{path}: not a P6 file")
    pos = 2
    fields = []
    for _ in range(3):
        tok, pos = _read_ppm_token(raw, pos)
        if not tok.isdigit():
            raise MalformedHeader(f"{path}: non-numeric header field {tok!r}")
        fields.append(int(tok))
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise MalformedHeader(f"{path}: bad dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedMaxval(f"{path}: maxval {maxval}, only 255 supported")
    # exactly one whitespace byte separates the header from pixel data
    if pos >= len(raw) or not raw[pos : pos + 1].isspace():
        raise MalformedHeader(f"{path}: missing separator after maxval")
    pos += 1
    need = width * height * 3
    pixels = raw[pos : pos + need]
    if len(pixels) < need:
        raise TruncatedPixelData(f"{path}: expected {need} pixel bytes, got {len(pixels)}")
    arr = np.frombuffer(pixels, dtype=np.uint8).astype(np.float64) / 255.0
    # file is row-major RGB interleaved; store channel-major (C,H,W)
    chw = arr.reshape(height, width, 3).transpose(2, 0, 1)
    return MediaTensor(IMAGE, chw)


def save_image(t: MediaTensor, path: str) -> None:
    """Write a binary PPM; values quantize as round-half-up(v*255), clamped."""
    if t.kind != IMAGE:
        raise ShapeMismatch("save_image needs an image tensor")
    _, h, w = t.shape
    body = np.clip(_round_half_up(t.data * 255.0), 0, 255).astype(np.uint8)
    interleaved = body.transpose(1, 2, 0).tobytes()
    try:
        with open(path, "wb") as fh:
            fh.write(b"P6\n%d %d\n255\n" % (w, h))
            fh.write(interleaved)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


# --- WAV PCM16 mono ---

def load_audio(path: str) -> MediaTensor:
    """Parse a mono PCM16 RIFF/WAVE file; samples map to s/32768."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc

    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise MalformedHeader(f"{path}: not a RIFF/WAVE file")
    pos = 12
    fmt = None
    data = None
    while pos + 8 <= len(raw):
        chunk_id = raw[pos : pos + 4]
        (size,) = struct.unpack("<I", raw[pos + 4 : pos + 8])
        body = raw[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise TruncatedData(f"{path}: chunk {chunk_id!r} truncated")
        if chunk_id == b"fmt ":
            fmt = body
        elif chunk_id == b"data":
            data = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    if fmt is None or data is None:
        raise MalformedHeader(f"{path}: missing fmt or data chunk")
    if len(fmt) < 16:
        raise MalformedHeader(f"{path}: short fmt chunk")
    audio_format, channels, rate, _, _, bits = struct.unpack("<HHIIHH", fmt[:16])
    if audio_format != 1 or bits != 16:
        raise UnsupportedEncoding(f"{path}: need PCM16, got format {audio_format}, {bits} bits")
    if channels != 1:
        raise UnsupportedEncoding(f"{path}: need mono, got {channels} channels")
    if len(data) % 2:
        raise TruncatedData(f"{path}: odd PCM byte count")
    samples = np.frombuffer(data, dtype="<i2").astype(np.float64) / 32768.0
    if samples.size < 1:
        raise TruncatedData(f"{path}: empty data chunk")
    return MediaTensor(AUDIO, samples, sample_rate=rate)


def save_audio(t: MediaTensor, path: str) -> None:
    """Write mono PCM16 WAV; values quantize as round-half-up(v*32768), clamped.

    The 32768 scale mirrors the load mapping exactly, so save(load(f))
    reproduces f and quantization is a projection.
    """
    if t.kind != AUDIO:
        raise ShapeMismatch("save_audio needs an audio tensor")
    ints = np.clip(_round_half_up(t.data * 32768.0), -32768, 32767).astype("<i2")
    pcm = ints.tobytes()
    rate = t.sample_rate
    header = b"RIFF" + struct.pack("<I", 36 + len(pcm)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, rate, rate * 2, 2, 16)
    header += b"data" + struct.pack("<I", len(pcm))
    try:
        with open(path, "wb") as fh:
            fh.write(header + pcm)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
