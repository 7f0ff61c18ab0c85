"""Command line interface.

    attack run --config cfg.json [--jobs N] [--out DIR]
    attack gradcheck --encoder SPEC_JSON --seed S [--cases N]
    attack defend --input FILE --defense SPEC_JSON --out FILE

Log verbosity comes from ATTACK_LOG (error, info, debug). Exit codes:
0 success, 1 configuration error, 2 partial or check failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import runner
from .config import parse_encoder_spec, parse_config, parse_defense_spec
from .defenses import apply_pipeline
from .errors import CrossfireError, MissingFile, SchemaViolation
from .gradcheck import check_spec
from .media import load_media, save_media

GRADCHECK_TOLERANCE = 1e-4


def _setup_logging() -> None:
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("ATTACK_LOG", "error").lower(), logging.ERROR
    )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        cfg = parse_config(args.config)
    except (SchemaViolation, MissingFile) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        return runner.run(cfg, jobs=args.jobs, out_dir=args.out)
    except CrossfireError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 2


def _cmd_gradcheck(args: argparse.Namespace) -> int:
    try:
        doc = json.loads(args.encoder)
    except json.JSONDecodeError as exc:
        print(f"config error: encoder spec is not valid JSON: {exc}", file=sys.stderr)
        return 1
    try:
        in_shape = doc.pop("in_shape", None)
        if not isinstance(in_shape, list):
            raise SchemaViolation("encoder.in_shape: required, a shape list")
        spec = parse_encoder_spec(doc, "encoder")
        err = check_spec(spec, tuple(in_shape), args.seed, cases=args.cases)
    except (SchemaViolation, CrossfireError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    ok = err < GRADCHECK_TOLERANCE
    print(f"max relative error over {args.cases} cases: {err:.3e} "
          f"({'OK' if ok else 'FAIL'}, tolerance {GRADCHECK_TOLERANCE:g})")
    return 0 if ok else 2


def _cmd_defend(args: argparse.Namespace) -> int:
    try:
        doc = json.loads(args.defense)
    except json.JSONDecodeError as exc:
        print(f"config error: defense spec is not valid JSON: {exc}", file=sys.stderr)
        return 1
    try:
        if isinstance(doc, list):
            pipeline = tuple(parse_defense_spec(d, f"defense[{i}]") for i, d in enumerate(doc))
        else:
            pipeline = (parse_defense_spec(doc),)
        media = load_media(args.input)
        defended, echo = apply_pipeline(media, pipeline)
        save_media(defended, args.out)
    except (SchemaViolation, CrossfireError) as exc:
        print(f"defend failed: {exc}", file=sys.stderr)
        return 1
    print(f"applied {echo}: {args.input} -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="attack", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a configured attack sweep")
    p_run.add_argument("--config", required=True, help="path to the JSON run config")
    p_run.add_argument("--jobs", type=int, default=1, help="worker pool size")
    p_run.add_argument("--out", default=None, help="override the config's output_dir")
    p_run.set_defaults(func=_cmd_run)

    p_grad = sub.add_parser("gradcheck", help="finite-difference check of an encoder")
    p_grad.add_argument("--encoder", required=True,
                        help='encoder spec JSON incl. in_shape, e.g. '
                             '\'{"kind":"patch_conv","patch":4,"hidden":8,"out_dim":16,"in_shape":[3,8,8]}\'')
    p_grad.add_argument("--seed", type=int, required=True)
    p_grad.add_argument("--cases", type=int, default=100)
    p_grad.set_defaults(func=_cmd_gradcheck)

    p_def = sub.add_parser("defend", help="apply a defense transform to a media file")
    p_def.add_argument("--input", required=True)
    p_def.add_argument("--defense", required=True, help="defense spec JSON (object or list)")
    p_def.add_argument("--out", required=True)
    p_def.set_defaults(func=_cmd_defend)
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
