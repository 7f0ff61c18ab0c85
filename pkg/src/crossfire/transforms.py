"""Turning a targeted text input into media of the victim's modality.

Real deployments would run a generative text-to-image / text-to-audio model
here; this module offers two stand-ins behind one interface: deterministic
procedural fixtures (seeded blob-and-stripe images, sinusoid audio) and a
file-based provider for externally supplied media.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import ModalityMismatch, ShapeMismatch, UnmappedLabel
from .media import AUDIO, IMAGE, MediaTensor, load_media
from .numerics import Rng, derive_seed, fnv1a, l2_normalize


@dataclass(frozen=True)
class TargetedInput:
    """Attacker-chosen content: free text plus its central elements."""

    text: str
    elements: tuple[str, ...]

    def __init__(self, text: str, elements: Sequence[str]):
        elems = tuple(elements)
        if not elems:
            raise ValueError("targeted input needs at least one element")
        for el in elems:
            if not el or el != el.lower() or any(ch.isspace() for ch in el):
                raise ValueError(f"element must be a lowercase token, got {el!r}")
        object.__setattr__(self, "text", text)
        object.__setattr__(self, "elements", elems)


@dataclass(frozen=True)
class ProceduralProvider:
    seed: int


@dataclass(frozen=True)
class FileBasedProvider:
    path_map: Mapping[str, str]


TransformProvider = Union[ProceduralProvider, FileBasedProvider]


# Default zero-shot label sets. The single-element set is ten animal labels;
# the multi-element set is ten dog-activity labels sharing the "dog" element.
DEFAULT_SINGLE_ELEMENT_LABELS: tuple[TargetedInput, ...] = tuple(
    TargetedInput(text, [elem])
    for text, elem in [
        ("A tiger", "tiger"),
        ("A elephant", "elephant"),
        ("A wolf", "wolf"),
        ("A zebra", "zebra"),
        ("An eagle", "eagle"),
        ("A giraffe", "giraffe"),
        ("A kangaroo", "kangaroo"),
        ("A dog", "dog"),
        ("A horse", "horse"),
        ("A groundhog", "groundhog"),
    ]
)

DEFAULT_MULTI_ELEMENT_LABELS: tuple[TargetedInput, ...] = tuple(
    TargetedInput(text, elems)
    for text, elems in [
        ("A dog is standing", ("dog", "standing")),
        ("A dog is playing ball", ("dog", "ball")),
        ("A dog is creeping", ("dog", "creeping")),
        ("A dog is playing frisbee", ("dog", "frisbee")),
        ("A dog is eating food", ("dog", "eating")),
        ("A dog is sleeping", ("dog", "sleeping")),
        ("A dog is playing with cats", ("dog", "cats")),
        ("A dog is chasing birds", ("dog", "birds")),
        ("A dog is running", ("dog", "running")),
        ("A dog is barking", ("dog", "barking")),
    ]
)


def _element_image(element: str, seed: int, shape: tuple[int, ...]) -> np.ndarray:
    """One element's sub-pattern: 2-4 Gaussian blobs plus an oriented stripe
    patch, everything non-negative so composites stay well scaled.

    Blob pairs are mirrored through the image center and the stripe ripple
    has zero phase there, making every fixture point-symmetric; content then
    survives flips and half-turn rotations, loosely mimicking how trained
    encoders tolerate such transforms."""
    c, h, w = shape
    rng = Rng(derive_seed(seed, "image", element))
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    cx0, cy0 = (w - 1) / 2.0, (h - 1) / 2.0
    field = np.zeros((c, h, w))

    n_blobs = 2 + rng.next_u64() % 3
    for _ in range(n_blobs):
        ox = rng.uniform(-0.35, 0.35) * (w - 1)
        oy = rng.uniform(-0.35, 0.35) * (h - 1)
        sigma = rng.uniform(0.08, 0.22) * min(h, w)
        bump = np.exp(-((xs - cx0 - ox) ** 2 + (ys - cy0 - oy) ** 2) / (2.0 * sigma * sigma))
        bump += np.exp(-((xs - cx0 + ox) ** 2 + (ys - cy0 + oy) ** 2) / (2.0 * sigma * sigma))
        for ch in range(c):
            # squared draw: strongly contrasting palettes across channels
            field[ch] += (0.02 + 0.98 * rng.uniform(0.0, 1.0) ** 2) * bump

    # one stripe patch: a centered cosine ripple under a Gaussian envelope
    theta = rng.uniform(0.0, np.pi)
    freq = rng.uniform(1.5, 4.0)
    env_sigma = rng.uniform(0.25, 0.45) * min(h, w)
    envelope = np.exp(-((xs - cx0) ** 2 + (ys - cy0) ** 2) / (2.0 * env_sigma * env_sigma))
    axis = (xs - cx0) * np.cos(theta) + (ys - cy0) * np.sin(theta)
    ripple = 0.5 * (1.0 + np.cos(2.0 * np.pi * freq * axis / max(h, w)))
    stripes = envelope * ripple
    for ch in range(c):
        field[ch] += (0.02 + 0.78 * rng.uniform(0.0, 1.0) ** 2) * stripes
    return field


def _element_audio(element: str, seed: int, n: int) -> np.ndarray:
    """Sum of 3 sinusoids; frequencies come from the element hash so each
    label keeps a stable spectral signature across seeds."""
    rng = Rng(derive_seed(seed, "audio", element))
    t = np.arange(n, dtype=np.float64) / n
    wave = np.zeros(n)
    for k in range(3):
        cycles = 4 + fnv1a(f"{element}:{k}") % 197
        amp = rng.uniform(0.3, 1.0)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        wave += amp * np.sin(2.0 * np.pi * cycles * t + phase)
    return wave


def transform_target(provider: TransformProvider, target: TargetedInput, shape: tuple[int, ...]) -> MediaTensor:
    """Produce the transformed input for a target at the given media shape.

    Multi-element targets superimpose one sub-pattern per element (procedural)
    or average the mapped files (file-based).
    """
    if isinstance(provider, FileBasedProvider):
        want_kind = IMAGE if len(shape) == 3 else AUDIO
        tensors = []
        for element in target.elements:
            if element not in provider.path_map:
                raise UnmappedLabel(f"no file mapped for element {element!r}")
            t = load_media(provider.path_map[element])
            if t.kind != want_kind:
                raise ModalityMismatch(f"{element!r} maps to {t.kind}, expected {want_kind}")
            if t.shape != tuple(shape):
                raise ShapeMismatch(f"{element!r} fixture has shape {t.shape}, expected {tuple(shape)}")
            tensors.append(t)
        if len(tensors) == 1:
            return tensors[0]
        mean = np.mean([t.data for t in tensors], axis=0)
        return MediaTensor(want_kind, mean, tensors[0].sample_rate)

    if len(shape) == 3:
        field = np.zeros(shape)
        for element in target.elements:
            field += _element_image(element, provider.seed, shape)
        peak = field.max()
        if peak <= 0.0:
            return MediaTensor(IMAGE, np.full(shape, 0.5))
        return MediaTensor(IMAGE, field / peak)

    (n,) = shape
    wave = np.zeros(n)
    for element in target.elements:
        wave += _element_audio(element, provider.seed, n)
    peak = np.abs(wave).max()
    if peak <= 0.0:
        return MediaTensor(AUDIO, wave)
    return MediaTensor(AUDIO, wave / peak)


def synthetic_media(tag: str, seed: int, shape: tuple[int, ...]) -> MediaTensor:
    """A structured random media sample for synthetic corpora.

    Reuses the fixture generators keyed by an arbitrary tag, plus a dash of
    seeded noise and a random exposure level, so corpus samples carry
    genuinely different statistics the way distinct photographs or clips
    would."""
    rng = Rng(derive_seed(seed, "corpus-noise", tag))
    if len(shape) == 3:
        field = _element_image(tag, seed, shape)
        field += 0.04 * rng.uniforms(int(np.prod(shape))).reshape(shape) * field.max()
        exposure = rng.uniform(0.18, 0.42)
        return MediaTensor(IMAGE, field / field.max() * exposure)
    (n,) = shape
    wave = _element_audio(tag, seed, n)
    wave += 0.15 * (rng.uniforms(n) * 2.0 - 1.0) * np.abs(wave).max()
    loudness = rng.uniform(0.3, 0.7)
    return MediaTensor(AUDIO, wave / np.abs(wave).max() * loudness)


def label_prototypes(provider: TransformProvider, labels: Sequence[TargetedInput], encoder) -> list[np.ndarray]:
    """Normalized embedding of each label's transformed fixture."""
    from .encoders import embed  # local import keeps module deps acyclic

    texts = [lab.text for lab in labels]
    if len(set(texts)) != len(texts):
        raise ValueError("labels must be distinct")
    protos = []
    for lab in labels:
        fixture = transform_target(provider, lab, encoder.in_shape)
        protos.append(l2_normalize(embed(encoder, fixture)))
    return protos
