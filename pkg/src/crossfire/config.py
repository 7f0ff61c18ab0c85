"""Run configuration: a strict JSON schema with field-path error messages.

Unknown keys are rejected rather than ignored so a typo in an alpha grid or
a variant name cannot silently invalidate a sweep.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Any, Sequence

from . import attack, defenses
from .encoders import EncoderSpec, IdentitySpec, PatchConvSpec, RandomProjectionSpec
from .errors import MissingFile, SchemaViolation
from .transforms import (
    DEFAULT_MULTI_ELEMENT_LABELS,
    DEFAULT_SINGLE_ELEMENT_LABELS,
    FileBasedProvider,
    ProceduralProvider,
    TargetedInput,
    TransformProvider,
)

DEFAULT_TEXT_VOCAB = 512


@dataclass(frozen=True)
class SyntheticCorpus:
    n: int
    seed: int
    shape: tuple[int, ...]


@dataclass(frozen=True)
class DirectoryCorpus:
    path: str


@dataclass(frozen=True)
class RunConfig:
    corpus: SyntheticCorpus | DirectoryCorpus
    attacker_spec: EncoderSpec
    attacker_seed: int
    evaluator_spec: EncoderSpec
    evaluator_seed: int
    target: TargetedInput
    transform: TransformProvider
    labels: tuple[TargetedInput, ...]
    target_label_index: int
    variants: tuple[str, ...]
    alphas: tuple[float, ...]
    lam: float
    max_iter: int
    delta0: str
    delta0_seed: int
    early_stop_loss: float | None
    defenses: tuple[tuple[defenses.DefenseSpec, ...], ...]
    output_dir: str
    global_seed: int
    text_vocab_size: int = DEFAULT_TEXT_VOCAB
    text_seed: int | None = None  # None: derived from the attacker seed
    dataset_name: str = field(default="synthetic")


def _expect_keys(obj: dict, path: str, required: Sequence[str], optional: Sequence[str] = ()) -> None:
    for key in obj:
        if key not in required and key not in optional:
            raise SchemaViolation(f"{path}: unknown key {key!r}")
    for key in required:
        if key not in obj:
            raise SchemaViolation(f"{path}: missing key {key!r}")


def _expect_type(value: Any, path: str, kinds: tuple[type, ...], desc: str) -> Any:
    if isinstance(value, bool) and bool not in kinds:
        raise SchemaViolation(f"{path}: expected {desc}")
    if not isinstance(value, kinds):
        raise SchemaViolation(f"{path}: expected {desc}, got {type(value).__name__}")
    return value


def _pos_int(value: Any, path: str) -> int:
    _expect_type(value, path, (int,), "a positive integer")
    if value < 1:
        raise SchemaViolation(f"{path}: must be >= 1, got {value}")
    return value


def _seed(value: Any, path: str) -> int:
    _expect_type(value, path, (int,), "an integer seed")
    if value < 0:
        raise SchemaViolation(f"{path}: seed must be >= 0")
    return value


def parse_encoder_spec(obj: Any, path: str) -> EncoderSpec:
    _expect_type(obj, path, (dict,), "an encoder spec object")
    kind = obj.get("kind")
    if kind == "identity":
        _expect_keys(obj, path, ["kind"])
        return IdentitySpec()
    if kind == "random_projection":
        _expect_keys(obj, path, ["kind", "out_dim"])
        return RandomProjectionSpec(out_dim=_pos_int(obj["out_dim"], f"{path}.out_dim"))
    if kind == "patch_conv":
        _expect_keys(obj, path, ["kind", "patch", "hidden", "out_dim"])
        return PatchConvSpec(
            patch=_pos_int(obj["patch"], f"{path}.patch"),
            hidden=_pos_int(obj["hidden"], f"{path}.hidden"),
            out_dim=_pos_int(obj["out_dim"], f"{path}.out_dim"),
        )
    raise SchemaViolation(f"{path}.kind: unknown encoder kind {kind!r}")


def _parse_encoder(obj: Any, path: str) -> tuple[EncoderSpec, int]:
    _expect_type(obj, path, (dict,), "an object with spec and seed")
    _expect_keys(obj, path, ["spec", "seed"])
    return parse_encoder_spec(obj["spec"], f"{path}.spec"), _seed(obj["seed"], f"{path}.seed")


def parse_defense_spec(obj: Any, path: str = "defense") -> defenses.DefenseSpec:
    _expect_type(obj, path, (dict,), "a defense spec object")
    kind = obj.get("kind")
    try:
        if kind == "upsample_x2":
            _expect_keys(obj, path, ["kind"])
            return defenses.UpsampleX2()
        if kind == "downsample_x2":
            _expect_keys(obj, path, ["kind"])
            return defenses.DownsampleX2()
        if kind == "rotate":
            _expect_keys(obj, path, ["kind"], optional=["angle_deg", "draw_seed"])
            angle = obj.get("angle_deg")
            if angle is not None:
                _expect_type(angle, f"{path}.angle_deg", (int, float), "a number")
            seed = obj.get("draw_seed")
            if seed is not None:
                seed = _seed(seed, f"{path}.draw_seed")
            return defenses.Rotate(angle_deg=angle, draw_seed=seed)
        if kind == "jpeg_like":
            _expect_keys(obj, path, ["kind", "quality"])
            return defenses.JpegLike(quality=_pos_int(obj["quality"], f"{path}.quality"))
        if kind == "smooth_denoise":
            _expect_keys(obj, path, ["kind", "window"])
            return defenses.SmoothDenoise(window=_pos_int(obj["window"], f"{path}.window"))
    except ValueError as exc:
        raise SchemaViolation(f"{path}: {exc}") from exc
    raise SchemaViolation(f"{path}.kind: unknown defense kind {kind!r}")


def _parse_target(obj: Any, path: str) -> TargetedInput:
    _expect_type(obj, path, (dict,), "a target object")
    _expect_keys(obj, path, ["text", "elements"])
    text = _expect_type(obj["text"], f"{path}.text", (str,), "a string")
    elements = _expect_type(obj["elements"], f"{path}.elements", (list,), "a list of tokens")
    try:
        return TargetedInput(text, [_expect_type(e, f"{path}.elements[]", (str,), "a string") for e in elements])
    except ValueError as exc:
        raise SchemaViolation(f"{path}: {exc}") from exc


def _parse_labels(obj: Any, path: str, target: TargetedInput) -> tuple[TargetedInput, ...]:
    if obj is None:
        return (
            DEFAULT_SINGLE_ELEMENT_LABELS
            if len(target.elements) == 1
            else DEFAULT_MULTI_ELEMENT_LABELS
        )
    if obj == "default_single":
        return DEFAULT_SINGLE_ELEMENT_LABELS
    if obj == "default_multi":
        return DEFAULT_MULTI_ELEMENT_LABELS
    _expect_type(obj, path, (list,), "a label list or default name")
    if not obj:
        raise SchemaViolation(f"{path}: label set must be non-empty")
    return tuple(_parse_target(entry, f"{path}[{i}]") for i, entry in enumerate(obj))


def parse_config_dict(doc: Any, base_dir: str = ".") -> RunConfig:
    """Validate a parsed JSON document; raises SchemaViolation / MissingFile."""
    _expect_type(doc, "config", (dict,), "a JSON object")
    _expect_keys(
        doc,
        "config",
        required=["corpus", "encoder_attacker", "encoder_evaluator", "target", "transform", "output_dir"],
        optional=[
            "labels", "variants", "alphas", "lambda", "max_iter", "delta0",
            "early_stop_loss", "defenses", "global_seed", "text_encoder", "dataset_name",
        ],
    )

    corpus_obj = _expect_type(doc["corpus"], "corpus", (dict,), "a corpus object")
    kind = corpus_obj.get("kind")
    corpus: SyntheticCorpus | DirectoryCorpus
    if kind == "synthetic":
        _expect_keys(corpus_obj, "corpus", ["kind", "n", "seed", "shape"])
        shape = _expect_type(corpus_obj["shape"], "corpus.shape", (list,), "a shape list")
        if len(shape) not in (1, 3) or not all(isinstance(d, int) and d > 0 for d in shape):
            raise SchemaViolation("corpus.shape: must be [C,H,W] or [N] of positive ints")
        corpus = SyntheticCorpus(
            n=_pos_int(corpus_obj["n"], "corpus.n"),
            seed=_seed(corpus_obj["seed"], "corpus.seed"),
            shape=tuple(shape),
        )
    elif kind == "directory":
        _expect_keys(corpus_obj, "corpus", ["kind", "path"])
        path = _expect_type(corpus_obj["path"], "corpus.path", (str,), "a path")
        full = os.path.join(base_dir, path)
        if not os.path.isdir(full):
            raise MissingFile(f"corpus.path: no such directory {full}")
        corpus = DirectoryCorpus(path=full)
    else:
        raise SchemaViolation(f"corpus.kind: unknown corpus kind {kind!r}")

    attacker_spec, attacker_seed = _parse_encoder(doc["encoder_attacker"], "encoder_attacker")
    evaluator_spec, evaluator_seed = _parse_encoder(doc["encoder_evaluator"], "encoder_evaluator")
    target = _parse_target(doc["target"], "target")

    transform_obj = _expect_type(doc["transform"], "transform", (dict,), "a transform object")
    tkind = transform_obj.get("kind")
    transform: TransformProvider
    if tkind == "procedural":
        _expect_keys(transform_obj, "transform", ["kind", "seed"])
        transform = ProceduralProvider(seed=_seed(transform_obj["seed"], "transform.seed"))
    elif tkind == "file_based":
        _expect_keys(transform_obj, "transform", ["kind", "paths"])
        paths = _expect_type(transform_obj["paths"], "transform.paths", (dict,), "a label->path map")
        resolved = {}
        for label, rel in paths.items():
            full = os.path.join(base_dir, _expect_type(rel, f"transform.paths.{label}", (str,), "a path"))
            if not os.path.isfile(full):
                raise MissingFile(f"transform.paths.{label}: no such file {full}")
            resolved[label] = full
        transform = FileBasedProvider(path_map=resolved)
    else:
        raise SchemaViolation(f"transform.kind: unknown transform kind {tkind!r}")

    labels = _parse_labels(doc.get("labels"), "labels", target)
    target_index = None
    for i, lab in enumerate(labels):
        if set(lab.elements) == set(target.elements):
            target_index = i
            break
    if target_index is None:
        raise SchemaViolation("labels: no label matches the target's elements")

    variants_obj = doc.get("variants", list(attack.VARIANTS))
    _expect_type(variants_obj, "variants", (list,), "a list of variant names")
    if not variants_obj:
        raise SchemaViolation("variants: must be non-empty")
    for i, v in enumerate(variants_obj):
        if v not in attack.VARIANTS:
            raise SchemaViolation(f"variants[{i}]: unknown variant {v!r}")
    variants = tuple(variants_obj)

    default_grid = attack.IMAGE_ALPHA_GRID if _corpus_modality(corpus) == "image" else attack.AUDIO_ALPHA_GRID
    alphas_obj = doc.get("alphas", list(default_grid))
    _expect_type(alphas_obj, "alphas", (list,), "a list of budgets")
    if not alphas_obj:
        raise SchemaViolation("alphas: must be non-empty")
    alphas = []
    for i, a in enumerate(alphas_obj):
        _expect_type(a, f"alphas[{i}]", (int, float), "a number")
        if a < 0:
            raise SchemaViolation(f"alphas[{i}]: must be >= 0, got {a}")
        alphas.append(float(a))

    lam = doc.get("lambda", attack.DEFAULT_LAMBDA)
    _expect_type(lam, "lambda", (int, float), "a number")
    if lam <= 0:
        raise SchemaViolation(f"lambda: must be > 0, got {lam}")

    max_iter = _pos_int(doc.get("max_iter", attack.DEFAULT_MAX_ITER), "max_iter")

    delta0_obj = doc.get("delta0", "zeros")
    if delta0_obj == "zeros":
        delta0, delta0_seed = attack.DELTA0_ZEROS, 0
    elif isinstance(delta0_obj, dict):
        _expect_keys(delta0_obj, "delta0", ["kind", "seed"])
        if delta0_obj["kind"] != "uniform_in_ball":
            raise SchemaViolation(f"delta0.kind: unknown kind {delta0_obj['kind']!r}")
        delta0, delta0_seed = attack.DELTA0_UNIFORM, _seed(delta0_obj["seed"], "delta0.seed")
    else:
        raise SchemaViolation("delta0: expected \"zeros\" or a uniform_in_ball object")

    early = doc.get("early_stop_loss")
    if early is not None:
        _expect_type(early, "early_stop_loss", (int, float), "a number")
        early = float(early)

    defense_entries = doc.get("defenses", [])
    _expect_type(defense_entries, "defenses", (list,), "a list of defense specs")
    pipelines = []
    for i, entry in enumerate(defense_entries):
        if isinstance(entry, list):
            pipelines.append(tuple(parse_defense_spec(s, f"defenses[{i}][{j}]") for j, s in enumerate(entry)))
        else:
            pipelines.append((parse_defense_spec(entry, f"defenses[{i}]"),))

    output_dir = _expect_type(doc["output_dir"], "output_dir", (str,), "a path")

    text_vocab, text_seed = DEFAULT_TEXT_VOCAB, None
    if "text_encoder" in doc:
        te = _expect_type(doc["text_encoder"], "text_encoder", (dict,), "a text encoder object")
        _expect_keys(te, "text_encoder", [], optional=["vocab_size", "seed"])
        if "vocab_size" in te:
            text_vocab = _pos_int(te["vocab_size"], "text_encoder.vocab_size")
        if "seed" in te:
            text_seed = _seed(te["seed"], "text_encoder.seed")

    dataset_name = doc.get("dataset_name")
    if dataset_name is None:
        dataset_name = os.path.basename(corpus.path.rstrip("/")) if isinstance(corpus, DirectoryCorpus) else "synthetic"
    else:
        _expect_type(dataset_name, "dataset_name", (str,), "a string")

    return RunConfig(
        corpus=corpus,
        attacker_spec=attacker_spec,
        attacker_seed=attacker_seed,
        evaluator_spec=evaluator_spec,
        evaluator_seed=evaluator_seed,
        target=target,
        transform=transform,
        labels=labels,
        target_label_index=target_index,
        variants=variants,
        alphas=tuple(alphas),
        lam=float(lam),
        max_iter=max_iter,
        delta0=delta0,
        delta0_seed=delta0_seed,
        early_stop_loss=early,
        defenses=tuple(pipelines),
        output_dir=os.path.join(base_dir, output_dir),
        global_seed=_seed(doc.get("global_seed", 0), "global_seed"),
        text_vocab_size=text_vocab,
        text_seed=text_seed,
        dataset_name=dataset_name,
    )


def _corpus_modality(corpus: SyntheticCorpus | DirectoryCorpus) -> str:
    from .media import FORMAT_PPM, sniff_format

    if isinstance(corpus, SyntheticCorpus):
        return "image" if len(corpus.shape) == 3 else "audio"
    names = sorted(os.listdir(corpus.path))
    if not names:
        raise SchemaViolation(f"corpus.path: directory {corpus.path} is empty")
    first = os.path.join(corpus.path, names[0])
    return "image" if sniff_format(first) == FORMAT_PPM else "audio"


def parse_config(path: str) -> RunConfig:
    """Load and validate a run configuration file."""
    if not os.path.isfile(path):
        raise MissingFile(f"no such config file: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"config is not valid JSON: {exc}") from exc
    return parse_config_dict(doc, base_dir=os.path.dirname(os.path.abspath(path)))
