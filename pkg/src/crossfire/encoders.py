"""Pluggable frozen encoders with exact analytic vector-Jacobian products.

Three families cover the zoo: a parameter-free identity (flatten), a dense
random projection with tanh, and a patch-wise conv-style net (per-patch
affine, tanh, mean pool over patches, output affine). tanh keeps every
derivative exact and cheap, which is what makes the gradient tests sharp.

A hashing bag-of-words text encoder provides fixed target embeddings for
the direct cross-modal baseline; no text gradients are ever needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import BadSpec, EmptyText, ShapeMismatch
from .media import AUDIO, IMAGE, MediaTensor
from .numerics import Rng, fnv1a


@dataclass(frozen=True)
class IdentitySpec:
    kind: str = "identity"


@dataclass(frozen=True)
class RandomProjectionSpec:
    out_dim: int
    kind: str = "random_projection"


@dataclass(frozen=True)
class PatchConvSpec:
    patch: int
    hidden: int
    out_dim: int
    kind: str = "patch_conv"


EncoderSpec = Union[IdentitySpec, RandomProjectionSpec, PatchConvSpec]


@dataclass(frozen=True)
class Encoder:
    """Frozen map MediaTensor -> embedding vector."""

    spec: EncoderSpec
    in_shape: tuple[int, ...]
    out_dim: int
    seed: int
    params: dict

    @property
    def modality(self) -> str:
        return IMAGE if len(self.in_shape) == 3 else AUDIO


def _patch_dim(in_shape: tuple[int, ...], patch: int) -> int:
    if len(in_shape) == 3:
        c, h, w = in_shape
        if h % patch or w % patch:
            raise BadSpec(f"patch {patch} must divide image dims {h}x{w}")
        return c * patch * patch
    (n,) = in_shape
    if n % patch:
        raise BadSpec(f"patch {patch} must divide audio length {n}")
    return patch


def make_encoder(spec: EncoderSpec, in_shape: tuple[int, ...], seed: int) -> Encoder:
    """Build an encoder with parameters drawn Gaussian(0, 1/sqrt(fan_in)).

    Draw order is fixed (W1 row-major, b1, W2, b2) so identical (spec, seed)
    gives bit-identical parameters everywhere.
    """
    in_shape = tuple(int(d) for d in in_shape)
    if len(in_shape) not in (1, 3) or any(d < 1 for d in in_shape):
        raise BadSpec(f"in_shape must be (C,H,W) or (N,), got {in_shape}")
    flat = int(np.prod(in_shape))
    rng = Rng(seed)

    if isinstance(spec, IdentitySpec):
        if flat < 2:
            raise BadSpec("identity encoder needs at least 2 input elements")
        return Encoder(spec, in_shape, flat, seed, params={})

    if isinstance(spec, RandomProjectionSpec):
        if spec.out_dim < 2:
            raise BadSpec(f"out_dim must be >= 2, got {spec.out_dim}")
        scale = 1.0 / np.sqrt(flat)
        w = rng.normals(spec.out_dim * flat).reshape(spec.out_dim, flat) * scale
        b = rng.normals(spec.out_dim) * scale
        return Encoder(spec, in_shape, spec.out_dim, seed, params=_freeze(w=w, b=b))

    if isinstance(spec, PatchConvSpec):
        if spec.out_dim < 2:
            raise BadSpec(f"out_dim must be >= 2, got {spec.out_dim}")
        if spec.patch < 1 or spec.hidden < 1:
            raise BadSpec("patch and hidden must be positive")
        pdim = _patch_dim(in_shape, spec.patch)
        s1 = 1.0 / np.sqrt(pdim)
        s2 = 1.0 / np.sqrt(spec.hidden)
        w1 = rng.normals(spec.hidden * pdim).reshape(spec.hidden, pdim) * s1
        b1 = rng.normals(spec.hidden) * s1
        w2 = rng.normals(spec.out_dim * spec.hidden).reshape(spec.out_dim, spec.hidden) * s2
        b2 = rng.normals(spec.out_dim) * s2
        return Encoder(spec, in_shape, spec.out_dim, seed, params=_freeze(w1=w1, b1=b1, w2=w2, b2=b2))

    raise BadSpec(f"unknown encoder spec {spec!r}")


def _freeze(**arrays: np.ndarray) -> dict:
    for a in arrays.values():
        a.flags.writeable = False
    return arrays


def _check_input(e: Encoder, v: MediaTensor) -> np.ndarray:
    if v.shape != e.in_shape:
        raise ShapeMismatch(f"encoder expects shape {e.in_shape}, got {v.shape}")
    return v.data


def _to_patches(e: Encoder, data: np.ndarray) -> np.ndarray:
    p = e.spec.patch
    if len(e.in_shape) == 3:
        c, h, w = e.in_shape
        return (
            data.reshape(c, h // p, p, w // p, p)
            .transpose(1, 3, 0, 2, 4)
            .reshape((h // p) * (w // p), c * p * p)
        )
    return data.reshape(-1, p)


def _from_patches(e: Encoder, patches: np.ndarray) -> np.ndarray:
    p = e.spec.patch
    if len(e.in_shape) == 3:
        c, h, w = e.in_shape
        return (
            patches.reshape(h // p, w // p, c, p, p)
            .transpose(2, 0, 3, 1, 4)
            .reshape(c, h, w)
        )
    return patches.reshape(e.in_shape)


def embed(e: Encoder, v: MediaTensor) -> np.ndarray:
    """Forward map to the embedding space."""
    data = _check_input(e, v)
    if isinstance(e.spec, IdentitySpec):
        return data.reshape(-1).copy()
    if isinstance(e.spec, RandomProjectionSpec):
        return np.tanh(e.params["w"] @ data.reshape(-1) + e.params["b"])
    hidden = np.tanh(_to_patches(e, data) @ e.params["w1"].T + e.params["b1"])
    pooled = hidden.mean(axis=0)
    return e.params["w2"] @ pooled + e.params["b2"]


def embed_vjp(e: Encoder, v: MediaTensor, cotangent: np.ndarray) -> np.ndarray:
    """J^T u at v, computed analytically (tanh' = 1 - tanh^2).

    Returns a gradient with the media's shape.
    """
    data = _check_input(e, v)
    u = np.asarray(cotangent, dtype=np.float64)
    if u.shape != (e.out_dim,):
        raise ShapeMismatch(f"cotangent dim {u.shape} != out_dim {e.out_dim}")
    if isinstance(e.spec, IdentitySpec):
        return u.reshape(e.in_shape).copy()
    if isinstance(e.spec, RandomProjectionSpec):
        y = np.tanh(e.params["w"] @ data.reshape(-1) + e.params["b"])
        return (e.params["w"].T @ (u * (1.0 - y * y))).reshape(e.in_shape)
    patches = _to_patches(e, data)
    hidden = np.tanh(patches @ e.params["w1"].T + e.params["b1"])
    pooled_grad = (e.params["w2"].T @ u) / patches.shape[0]
    dz = (1.0 - hidden * hidden) * pooled_grad
    return _from_patches(e, dz @ e.params["w1"])


# --- text targets ---

@dataclass(frozen=True)
class TextEncoder:
    """Hashing bag-of-words into a seeded projection, tanh-squashed."""

    vocab_size: int
    out_dim: int
    seed: int
    projection: np.ndarray

    @staticmethod
    def create(vocab_size: int, out_dim: int, seed: int) -> "TextEncoder":
        if vocab_size < 1 or out_dim < 2:
            raise BadSpec(f"bad text encoder dims vocab={vocab_size}, out={out_dim}")
        proj = Rng(seed).normals(vocab_size * out_dim).reshape(vocab_size, out_dim)
        proj *= 1.0 / np.sqrt(vocab_size)
        proj.flags.writeable = False
        return TextEncoder(vocab_size, out_dim, seed, proj)


def embed_text(te: TextEncoder, s: str) -> np.ndarray:
    """Deterministic text embedding: lowercase, whitespace-split, hash-count, project."""
    tokens = s.strip().lower().split()
    if not tokens:
        raise EmptyText("text target is empty after trimming")
    counts = np.zeros(te.vocab_size)
    for tok in tokens:
        counts[fnv1a(tok) % te.vocab_size] += 1.0
    return np.tanh(counts @ te.projection)


# Canonical zoo exercised by the gradient-check harness. Dimensions are kept
# small enough that a full central-difference J^T u is affordable; the sweep
# scenarios instantiate the same specs at larger sizes.
ENCODER_ZOO: list[tuple[str, EncoderSpec, tuple[int, ...]]] = [
    ("identity_image", IdentitySpec(), (3, 4, 4)),
    ("identity_audio", IdentitySpec(), (64,)),
    ("random_projection_image", RandomProjectionSpec(out_dim=16), (3, 8, 8)),
    ("random_projection_audio", RandomProjectionSpec(out_dim=16), (256,)),
    ("patch_conv_image", PatchConvSpec(patch=4, hidden=8, out_dim=16), (3, 8, 8)),
    ("patch_conv_audio", PatchConvSpec(patch=16, hidden=8, out_dim=16), (256,)),
]
