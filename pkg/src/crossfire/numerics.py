"""Deterministic numeric kernel: normalization, inner products, an 8x8
orthonormal DCT, bilinear sampling and a counter-based seeded RNG.

Everything here is a pure function of its inputs; the RNG is an explicit
value owned by the caller, never hidden global state.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DegenerateNorm, DimMismatch

EPS_NORM = 1e-12

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _splitmix(states: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer over an array of uint64 states."""
    z = states.astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


class Rng:
    """Counter-based splitmix64 stream.

    Output i is mix(seed + (i+1) * golden_ratio) in 64-bit arithmetic, so an
    identical seed yields an identical stream on every platform, and blocks
    can be generated vectorized without changing the stream.
    """

    def __init__(self, seed: int):
        self._seed = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        self._counter = 0

    def raw(self, n: int) -> np.ndarray:
        """Next n raw uint64 outputs."""
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        self._counter += n
        return _splitmix(self._seed + idx * _GOLDEN)

    def next_u64(self) -> int:
        return int(self.raw(1)[0])

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles uniform in [0, 1), 53-bit resolution."""
        return (self.raw(n) >> np.uint64(11)).astype(np.float64) / float(1 << 53)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return lo + (hi - lo) * float(self.uniforms(1)[0])

    def normals(self, n: int) -> np.ndarray:
        """n standard normal draws via Box-Muller (consumes 2n counter ticks)."""
        m = (n + 1) // 2
        u1 = self.uniforms(m)
        u2 = self.uniforms(m)
        r = np.sqrt(-2.0 * np.log(1.0 - u1))  # 1-u1 in (0,1], log never sees 0
        theta = 2.0 * math.pi * u2
        out = np.concatenate([r * np.cos(theta), r * np.sin(theta)])
        return out[:n]

    def normal(self) -> float:
        return float(self.normals(1)[0])


def derive_seed(*parts: int | str) -> int:
    """Mix heterogeneous parts (ints, strings) into one u64 seed.

    FNV-1a over the parts' byte encodings, then a splitmix finalize; used to
    give every (global_seed, sample_id) pair an independent stream.
    """
    h = 0xCBF29CE484222325
    for part in parts:
        data = part.to_bytes(8, "little", signed=False) if isinstance(part, int) else part.encode("utf-8")
        for b in data:
            h ^= b
            h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return int(_splitmix(np.array([h], dtype=np.uint64))[0])


def fnv1a(text: str) -> int:
    """64-bit FNV-1a hash of a UTF-8 string."""
    h = 0xCBF29CE484222325
    for b in text.encode("utf-8"):
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def l2_normalize(x: np.ndarray) -> np.ndarray:
    """x / ||x||_2. Raises DegenerateNorm when the norm is below 1e-12."""
    x = np.asarray(x, dtype=np.float64)
    n = float(np.linalg.norm(x))
    if n <= EPS_NORM:
        raise DegenerateNorm(f"cannot normalize vector with norm {n:g}")
    return x / n


def inner(a: np.ndarray, b: np.ndarray) -> float:
    """Inner product of two equal-dimension vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimMismatch(f"inner product dims differ: {a.shape} vs {b.shape}")
    return float(a @ b)


def _dct8_matrix() -> np.ndarray:
    # orthonormal type-II DCT basis: rows have unit L2 norm
    c = np.empty((8, 8))
    for u in range(8):
        scale = math.sqrt(1.0 / 8.0) if u == 0 else math.sqrt(2.0 / 8.0)
        for x in range(8):
            c[u, x] = scale * math.cos((2 * x + 1) * u * math.pi / 16.0)
    return c


_DCT8 = _dct8_matrix()


def dct8_forward(block: np.ndarray) -> np.ndarray:
    """Orthonormal 2-D type-II DCT of an 8x8 block."""
    block = np.asarray(block, dtype=np.float64)
    if block.shape != (8, 8):
        raise DimMismatch(f"dct8 expects an 8x8 block, got {block.shape}")
    return _DCT8 @ block @ _DCT8.T


def dct8_inverse(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of dct8_forward; forward-then-inverse recovers the block."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape != (8, 8):
        raise DimMismatch(f"dct8 expects an 8x8 block, got {coeffs.shape}")
    return _DCT8.T @ coeffs @ _DCT8


def bilinear_sample(img: np.ndarray, x: float, y: float) -> np.ndarray:
    """Bilinear interpolation of a (C,H,W) image at continuous (x, y).

    Texel centers sit at integer coordinates; x runs along width, y along
    height. Neighbors outside the image contribute zero.
    """
    img = np.asarray(img, dtype=np.float64)
    c, h, w = img.shape
    x0 = math.floor(x)
    y0 = math.floor(y)
    fx = x - x0
    fy = y - y0
    out = np.zeros(c)
    for dy, wy in ((0, 1.0 - fy), (1, fy)):
        yy = y0 + dy
        if wy == 0.0 or not (0 <= yy < h):
            continue
        for dx, wx in ((0, 1.0 - fx), (1, fx)):
            xx = x0 + dx
            if wx == 0.0 or not (0 <= xx < w):
                continue
            out += wy * wx * img[:, yy, xx]
    return out
