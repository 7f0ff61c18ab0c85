"""Embedding-alignment loss and the sign-gradient PGD solver.

The objective drives the (unit-normalized) embedding of the perturbed media
toward a target embedding. Each iteration takes a signed gradient step on
the perturbation, then projects onto the L-infinity budget ball and back
into the media's valid value range.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .encoders import Encoder, embed, embed_vjp
from .errors import ShapeMismatch
from .media import MediaTensor, value_range
from .numerics import Rng, inner, l2_normalize

VARIANT_CROSSFIRE = "crossfire"
VARIANT_UNNORMALIZED = "crossfire_unnormalized"
VARIANT_DIRECT = "direct_cross_modal"
VARIANTS = (VARIANT_CROSSFIRE, VARIANT_UNNORMALIZED, VARIANT_DIRECT)

# Budget grids the sweeps use by default, and the stock solver settings.
IMAGE_ALPHA_GRID = (0.0, 1 / 255, 4 / 255, 8 / 255, 16 / 255, 32 / 255)
AUDIO_ALPHA_GRID = (0.0, 0.005, 0.01, 0.05, 0.1, 0.5)
DEFAULT_LAMBDA = 0.01
DEFAULT_MAX_ITER = 3000

DELTA0_ZEROS = "zeros"
DELTA0_UNIFORM = "uniform_in_ball"


@dataclass(frozen=True)
class AttackConfig:
    variant: str
    alpha: float
    lam: float = DEFAULT_LAMBDA
    max_iter: int = DEFAULT_MAX_ITER
    delta0: str = DELTA0_ZEROS
    delta0_seed: int = 0
    early_stop_loss: float | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.lam <= 0:
            raise ValueError("lambda must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.delta0 not in (DELTA0_ZEROS, DELTA0_UNIFORM):
            raise ValueError(f"unknown delta0 {self.delta0!r}")


@dataclass
class AttackTrace:
    losses: list[float] = field(default_factory=list)
    final_alignment: float = 0.0
    iterations_run: int = 0
    stopped_early: bool = False


def adm_loss_and_grad(
    target: np.ndarray, e: Encoder, v_adv: MediaTensor, variant: str
) -> tuple[float, np.ndarray]:
    """Loss and its media-shaped gradient at v_adv.

    For the normalized variants the target must already be unit length and
    the loss is ||target - z/||z||||^2; the gradient chains the
    normalization Jacobian (I - zz^T/||z||^2)/||z|| through the encoder's
    vector-Jacobian product. The unnormalized ablation compares raw
    embeddings directly.
    """
    z = embed(e, v_adv)
    if variant == VARIANT_UNNORMALIZED:
        diff = z - target
        return float(diff @ diff), embed_vjp(e, v_adv, 2.0 * diff)
    zn = float(np.linalg.norm(z))
    zh = l2_normalize(z)
    diff = zh - target
    loss = float(diff @ diff)
    dzh = 2.0 * diff
    dz = (dzh - zh * float(zh @ dzh)) / zn
    return loss, embed_vjp(e, v_adv, dz)


def pgd_step(
    delta: np.ndarray, grad: np.ndarray, lam: float, alpha: float, v: MediaTensor
) -> np.ndarray:
    """One signed-gradient update followed by the double projection.

    sign(0) is 0, so zero-gradient coordinates (and the whole perturbation
    at alpha=0) stay exactly fixed. After clipping to [-alpha, alpha] each
    coordinate is further clipped so v + delta stays in the media range.
    """
    if delta.shape != grad.shape or delta.shape != v.data.shape:
        raise ShapeMismatch("delta/grad/media shapes disagree")
    lo, hi = value_range(v.kind)
    d = np.clip(delta - lam * np.sign(grad), -alpha, alpha)
    return np.clip(d, lo - v.data, hi - v.data)


def _initial_delta(v: MediaTensor, cfg: AttackConfig) -> np.ndarray:
    if cfg.delta0 == DELTA0_ZEROS or cfg.alpha == 0.0:
        return np.zeros_like(v.data)
    rng = Rng(cfg.delta0_seed)
    d = (rng.uniforms(v.data.size).reshape(v.data.shape) * 2.0 - 1.0) * cfg.alpha
    lo, hi = value_range(v.kind)
    return np.clip(d, lo - v.data, hi - v.data)


def _as_media(v: MediaTensor, delta: np.ndarray) -> MediaTensor:
    lo, hi = value_range(v.kind)
    return v.with_data(np.clip(v.data + delta, lo, hi))


def run_attack(
    e: Encoder,
    target: Union[MediaTensor, np.ndarray],
    v: MediaTensor,
    cfg: AttackConfig,
) -> tuple[MediaTensor, AttackTrace]:
    """Full attack loop: fixed target embedding, then sign-PGD to max_iter.

    The target is either transformed-input media (embedded once with e) or a
    precomputed raw target embedding, e.g. from a text encoder for the
    direct cross-modal baseline. Deterministic given (encoder, cfg, inputs).
    """
    if isinstance(target, MediaTensor):
        target_raw = embed(e, target)
    else:
        target_raw = np.asarray(target, dtype=np.float64)
        if target_raw.shape != (e.out_dim,):
            raise ShapeMismatch(f"target dim {target_raw.shape} != out_dim {e.out_dim}")
    target_for_loss = target_raw if cfg.variant == VARIANT_UNNORMALIZED else l2_normalize(target_raw)

    delta = _initial_delta(v, cfg)
    trace = AttackTrace()
    for _ in range(cfg.max_iter):
        v_adv = _as_media(v, delta)
        loss, grad = adm_loss_and_grad(target_for_loss, e, v_adv, cfg.variant)
        trace.losses.append(loss)
        if cfg.early_stop_loss is not None and loss <= cfg.early_stop_loss:
            trace.stopped_early = True
            break
        delta = pgd_step(delta, grad, cfg.lam, cfg.alpha, v)

    trace.iterations_run = len(trace.losses)
    v_adv = _as_media(v, delta)
    trace.final_alignment = inner(l2_normalize(target_raw), l2_normalize(embed(e, v_adv)))
    return v_adv, trace
