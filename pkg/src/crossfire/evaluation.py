"""Metrics and corpus aggregation: embedding alignment, embedding-space
zero-shot attack success rate, and the sweep report table.

The success rate here is computed on embeddings of the (optionally
defended) perturbed media, not on any generated downstream content, so the
report column is named asr_embed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .defenses import resize
from .encoders import Encoder, embed
from .errors import EmptyResults, IncompleteGrid, ShapeMismatch
from .media import IMAGE, MediaTensor
from .numerics import inner, l2_normalize


@dataclass(frozen=True)
class SampleResult:
    sample_id: str
    dataset: str
    variant: str
    alpha: float
    alignment_before: float
    alignment_after: float
    predicted_label: int
    asr_hit: bool
    defense: str = "none"
    iterations: int = 0


@dataclass(frozen=True)
class ReportRow:
    dataset: str
    variant: str
    alpha: float
    defense: str
    asr_embed: float
    mean_alignment: float
    n: int


@dataclass(frozen=True)
class SweepReport:
    rows: tuple[ReportRow, ...]


def alignment(e: Encoder, t_v: MediaTensor, v_adv: MediaTensor) -> float:
    """Inner product of the unit-normalized embeddings of both media."""
    return inner(l2_normalize(embed(e, t_v)), l2_normalize(embed(e, v_adv)))


def zero_shot_classify(e: Encoder, media: MediaTensor, prototypes: Sequence[np.ndarray]) -> int:
    """Nearest label prototype by cosine similarity; ties break low."""
    if not len(prototypes):
        raise EmptyResults("need at least one prototype")
    z = l2_normalize(embed(e, media))
    best_idx, best_sim = 0, -np.inf
    for k, proto in enumerate(prototypes):
        sim = inner(z, proto)
        if sim > best_sim:
            best_idx, best_sim = k, sim
    return best_idx


def asr(results: Sequence[SampleResult], target_index: int) -> float:
    """Fraction of results classified as the targeted label."""
    if not results:
        raise EmptyResults("cannot compute a rate over zero samples")
    hits = sum(1 for r in results if r.predicted_label == target_index)
    return hits / len(results)


def fit_to_encoder(media: MediaTensor, e: Encoder) -> MediaTensor:
    """Bring defended media back to the encoder's input shape.

    Shape-changing defenses (the x2 resizes) get undone by the matching
    bilinear resize, the way real pipelines re-fit inputs to an encoder's
    expected resolution before embedding.
    """
    if media.shape == e.in_shape:
        return media
    if media.kind != IMAGE or len(e.in_shape) != 3:
        raise ShapeMismatch(f"cannot fit {media.shape} to encoder shape {e.in_shape}")
    c, h, w = e.in_shape
    if media.shape == (c, 2 * h, 2 * w):
        return resize(media, 0.5)
    if media.shape == (c, h // 2, w // 2) and h % 2 == 0 and w % 2 == 0:
        return resize(media, 2.0)
    raise ShapeMismatch(f"cannot fit {media.shape} to encoder shape {e.in_shape}")


def build_sweep_report(all_results: Sequence[SampleResult]) -> SweepReport:
    """Aggregate per-sample results into one row per
    (dataset, variant, alpha, defense) cell, verifying grid completeness."""
    if not all_results:
        raise EmptyResults("no results to aggregate")
    cells: dict[tuple, list[SampleResult]] = {}
    for r in all_results:
        cells.setdefault((r.dataset, r.variant, r.alpha, r.defense), []).append(r)

    # every (variant, alpha) combination must be present for each
    # (dataset, defense) pair, otherwise means are not comparable
    variants = sorted({r.variant for r in all_results})
    alphas = sorted({r.alpha for r in all_results})
    pairs = sorted({(r.dataset, r.defense) for r in all_results})
    for dataset, defense in pairs:
        for variant in variants:
            for alpha in alphas:
                if (dataset, variant, alpha, defense) not in cells:
                    raise IncompleteGrid(
                        f"missing cell dataset={dataset} variant={variant} "
                        f"alpha={alpha:g} defense={defense}"
                    )

    rows = []
    for key in sorted(cells):
        dataset, variant, alpha, defense = key
        group = cells[key]
        rows.append(
            ReportRow(
                dataset=dataset,
                variant=variant,
                alpha=alpha,
                defense=defense,
                asr_embed=sum(1 for r in group if r.asr_hit) / len(group),
                mean_alignment=float(np.mean([r.alignment_after for r in group])),
                n=len(group),
            )
        )
    return SweepReport(rows=tuple(rows))
