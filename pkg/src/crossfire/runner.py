"""Batch orchestration: corpus loading, attack sweeps, defended evaluation
and report emission.

Samples are processed by a bounded thread pool; every worker input is
immutable, per-sample seeds derive from (global_seed, sample_id), and
results are sorted before aggregation, so parallel and serial runs emit
byte-identical reports.
"""

from __future__ import annotations

import concurrent.futures
import json
import logging
import os
from dataclasses import dataclass

import numpy as np

from . import report as report_mod
from .attack import AttackConfig, VARIANT_DIRECT, run_attack
from .config import DirectoryCorpus, RunConfig, SyntheticCorpus
from .defenses import DefenseSpec, Rotate, apply_pipeline
from .encoders import Encoder, TextEncoder, embed, embed_text, make_encoder
from .errors import CrossfireError
from .evaluation import SampleResult, build_sweep_report, fit_to_encoder
from .media import IMAGE, MediaTensor, load_media, save_media
from .numerics import derive_seed, inner, l2_normalize
from .transforms import label_prototypes, synthetic_media, transform_target

log = logging.getLogger("crossfire")


@dataclass(frozen=True)
class _RunContext:
    cfg: RunConfig
    attacker: Encoder
    evaluator: Encoder
    t_v: MediaTensor
    text_target: np.ndarray | None
    target_hat_eval: np.ndarray
    prototypes: tuple[np.ndarray, ...]
    defenses: tuple[tuple[tuple[DefenseSpec, ...], str], ...]
    out_dir: str


def load_corpus(cfg: RunConfig) -> list[tuple[str, MediaTensor]]:
    """Load or synthesize the corpus; samples must share kind and shape."""
    if isinstance(cfg.corpus, SyntheticCorpus):
        return [
            (f"sample{i:03d}", synthetic_media(f"sample{i:03d}", cfg.corpus.seed, cfg.corpus.shape))
            for i in range(cfg.corpus.n)
        ]
    assert isinstance(cfg.corpus, DirectoryCorpus)
    samples = []
    for name in sorted(os.listdir(cfg.corpus.path)):
        path = os.path.join(cfg.corpus.path, name)
        if not os.path.isfile(path):
            continue
        samples.append((os.path.splitext(name)[0], load_media(path)))
    if not samples:
        raise CrossfireError(f"corpus directory {cfg.corpus.path} has no media files")
    first = samples[0][1]
    for sid, t in samples:
        if t.kind != first.kind or t.shape != first.shape:
            raise CrossfireError(
                f"corpus mixes shapes: {sid} is {t.kind}{t.shape}, expected {first.kind}{first.shape}"
            )
    return samples


def _resolve_defenses(cfg: RunConfig) -> tuple[tuple[tuple[DefenseSpec, ...], str], ...]:
    # seeded rotations draw their angle exactly once per run, here
    resolved = []
    for pipeline in cfg.defenses:
        fixed = tuple(
            Rotate(angle_deg=s.resolve_angle()) if isinstance(s, Rotate) and s.draw_seed is not None else s
            for s in pipeline
        )
        resolved.append((fixed, "+".join(_echo(s) for s in fixed)))
    return tuple(resolved)


def _echo(spec: DefenseSpec) -> str:
    if isinstance(spec, Rotate):
        return f"rotate({spec.angle_deg:.4f})"
    if spec.kind == "jpeg_like":
        return f"jpeg_like(q={spec.quality})"
    if spec.kind == "smooth_denoise":
        return f"smooth_denoise(w={spec.window};stand-in)"
    return spec.kind


def _evaluate(ctx: _RunContext, media: MediaTensor) -> tuple[float, int]:
    z = l2_normalize(embed(ctx.evaluator, media))
    align = inner(ctx.target_hat_eval, z)
    predicted = int(np.argmax([inner(z, p) for p in ctx.prototypes]))
    return align, predicted


def _attack_sample(ctx: _RunContext, sample_id: str, v: MediaTensor) -> list[SampleResult]:
    cfg = ctx.cfg
    align_before, _ = _evaluate(ctx, v)
    results = []
    for variant in cfg.variants:
        target = ctx.text_target if variant == VARIANT_DIRECT else ctx.t_v
        for alpha in cfg.alphas:
            acfg = AttackConfig(
                variant=variant,
                alpha=alpha,
                lam=cfg.lam,
                max_iter=cfg.max_iter,
                delta0=cfg.delta0,
                delta0_seed=derive_seed(cfg.global_seed, sample_id),
                early_stop_loss=cfg.early_stop_loss,
            )
            v_adv, trace = run_attack(ctx.attacker, target, v, acfg)
            ext = "ppm" if v.kind == IMAGE else "wav"
            fname = f"{sample_id}_{variant}_{alpha:.6g}.{ext}"
            save_media(v_adv, os.path.join(ctx.out_dir, fname))

            for pipeline, echo in ((None, "none"),) + tuple(ctx.defenses):
                if pipeline is None:
                    defended = v_adv
                else:
                    defended, _ = apply_pipeline(v_adv, pipeline)
                    defended = fit_to_encoder(defended, ctx.evaluator)
                align_after, predicted = _evaluate(ctx, defended)
                results.append(
                    SampleResult(
                        sample_id=sample_id,
                        dataset=cfg.dataset_name,
                        variant=variant,
                        alpha=alpha,
                        alignment_before=align_before,
                        alignment_after=align_after,
                        predicted_label=predicted,
                        asr_hit=predicted == cfg.target_label_index,
                        defense=echo,
                        iterations=trace.iterations_run,
                    )
                )
    return results


def run(cfg: RunConfig, jobs: int = 1, out_dir: str | None = None) -> int:
    """Execute the configured sweep. Returns the process exit code."""
    out = out_dir or cfg.output_dir
    os.makedirs(out, exist_ok=True)

    samples = load_corpus(cfg)
    shape = samples[0][1].shape
    attacker = make_encoder(cfg.attacker_spec, shape, cfg.attacker_seed)
    evaluator = make_encoder(cfg.evaluator_spec, shape, cfg.evaluator_seed)
    t_v = transform_target(cfg.transform, cfg.target, shape)

    text_target = None
    if VARIANT_DIRECT in cfg.variants:
        text_seed = cfg.text_seed if cfg.text_seed is not None else derive_seed(cfg.attacker_seed, "text")
        te = TextEncoder.create(cfg.text_vocab_size, attacker.out_dim, text_seed)
        text_target = embed_text(te, cfg.target.text)

    ctx = _RunContext(
        cfg=cfg,
        attacker=attacker,
        evaluator=evaluator,
        t_v=t_v,
        text_target=text_target,
        target_hat_eval=l2_normalize(embed(evaluator, t_v)),
        prototypes=tuple(label_prototypes(cfg.transform, cfg.labels, evaluator)),
        defenses=_resolve_defenses(cfg),
        out_dir=out,
    )

    all_results: list[SampleResult] = []
    failures: list[dict] = []

    def work(item):
        sid, v = item
        try:
            res = _attack_sample(ctx, sid, v)
            log.info("finished %s (%d results)", sid, len(res))
            return sid, res, None
        except CrossfireError as exc:
            log.error("sample %s failed: %s", sid, exc)
            return sid, [], str(exc)

    if jobs <= 1:
        outcomes = [work(item) for item in samples]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(work, samples))
    for sid, res, err in outcomes:
        if err is None:
            all_results.extend(res)
        else:
            failures.append({"sample_id": sid, "error": err})

    all_results.sort(key=lambda r: (r.dataset, r.sample_id, r.variant, r.alpha, r.defense))
    sweep = build_sweep_report(all_results)
    report_mod.write_csv(sweep, os.path.join(out, "report.csv"))
    report_mod.write_json(sweep, os.path.join(out, "report.json"))
    figures = report_mod.render_figures(sweep, out)
    log.info("wrote report.csv, report.json and %d figures to %s", len(figures), out)

    if failures:
        with open(os.path.join(out, "errors.json"), "w", encoding="utf-8") as fh:
            json.dump({"failures": failures}, fh, indent=2)
        return 2
    return 0
