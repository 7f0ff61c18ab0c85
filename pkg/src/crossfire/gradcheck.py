"""Finite-difference verification of the analytic encoder gradients."""

from __future__ import annotations

import numpy as np

from .encoders import Encoder, EncoderSpec, embed, embed_vjp, make_encoder
from .media import AUDIO, IMAGE, MediaTensor
from .numerics import Rng, derive_seed


def finite_difference_vjp(e: Encoder, v: MediaTensor, cotangent: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """Central-difference estimate of J^T u, one coordinate at a time."""
    base = v.data.copy()
    flat = base.reshape(-1)
    out = np.empty(flat.shape)
    for i in range(flat.size):
        bumped = flat.copy()
        bumped[i] = flat[i] + h
        plus = embed(e, MediaTensor(v.kind, bumped.reshape(base.shape), v.sample_rate))
        bumped[i] = flat[i] - h
        minus = embed(e, MediaTensor(v.kind, bumped.reshape(base.shape), v.sample_rate))
        out[i] = float(cotangent @ (plus - minus)) / (2.0 * h)
    return out.reshape(base.shape)


def random_case(e: Encoder, seed: int) -> tuple[MediaTensor, np.ndarray]:
    """A seeded (media, cotangent) pair kept away from range edges so the
    central difference never leaves the valid domain."""
    rng = Rng(seed)
    kind = IMAGE if len(e.in_shape) == 3 else AUDIO
    size = int(np.prod(e.in_shape))
    if kind == IMAGE:
        data = 0.1 + 0.8 * rng.uniforms(size)
    else:
        data = -0.9 + 1.8 * rng.uniforms(size)
    v = MediaTensor(kind, data.reshape(e.in_shape))
    return v, rng.normals(e.out_dim)


def max_relative_error(e: Encoder, cases: int, seed: int = 0, h: float = 1e-4) -> float:
    """Worst |analytic - fd|_inf / |fd|_inf over seeded cases."""
    worst = 0.0
    for c in range(cases):
        v, u = random_case(e, derive_seed(seed, "gradcheck", c))
        analytic = embed_vjp(e, v, u)
        fd = finite_difference_vjp(e, v, u, h)
        denom = max(float(np.abs(fd).max()), 1e-12)
        worst = max(worst, float(np.abs(analytic - fd).max()) / denom)
    return worst


def check_spec(spec: EncoderSpec, in_shape: tuple[int, ...], seed: int, cases: int = 100) -> float:
    return max_relative_error(make_encoder(spec, in_shape, seed), cases)
