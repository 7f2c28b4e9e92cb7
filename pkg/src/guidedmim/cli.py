"""Command-line entry point.

Subcommands: gen-corpus, pretrain, finetune, evaluate, ablate, attmap.
Exit codes: 0 success, 1 validation/usage error, 2 runtime failure. Every
run writes a run.json provenance record (resolved config, seed, timestamps)
into its output directory.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time

from . import config as config_mod
from . import evaluation, train, viz
from .config import ConfigError
from .corpus import AugmentationPolicy, CharsetError, generate_corpus, load_image
from .model import DecoderConfig, EncoderConfig, RecognizerConfig
from .train import FinetuneConfig, PretrainConfig


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}")


def _config_keys(cls) -> list[str]:
    keys = []
    for f in dataclasses.fields(cls):
        if f.name in config_mod._NESTED:
            sub = config_mod._NESTED[f.name]
            keys.extend(f"{f.name}.{sf.name}" for sf in dataclasses.fields(sub))
        else:
            keys.append(f.name)
    return keys


def _add_config_options(parser: argparse.ArgumentParser, cls) -> list[str]:
    keys = _config_keys(cls)
    for key in keys:
        flag = "--" + key.replace(".", "-").replace("_", "-")
        parser.add_argument(flag, dest=key, metavar="VALUE", default=None)
    return keys


def _collect_cli_values(args: argparse.Namespace, keys: list[str]) -> dict:
    return {k: getattr(args, k) for k in keys if getattr(args, k) is not None}


def _resolve_config(args, keys, builder):
    file_values = config_mod.load_config_file(args.config) if args.config else {}
    merged = config_mod.merge_values(file_values, _collect_cli_values(args, keys))
    return builder(merged), merged


def _write_run_record(out_dir: str, command: str, resolved: dict, seed,
                      started: float) -> None:
    os.makedirs(out_dir, exist_ok=True)
    record = {
        "command": command,
        "argv": sys.argv[1:],
        "resolved_config": resolved,
        "seed": seed,
        "started_unix": started,
        "finished_unix": time.time(),
    }
    with open(os.path.join(out_dir, "run.json"), "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=1, sort_keys=True, default=str)


def build_parser() -> _Parser:
    parser = _Parser(prog="guidedmim",
                     description="Masked text-image pre-training toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-corpus", parents=[], help="render a synthetic corpus")
    p.add_argument("--vocab", required=True, help="text file, one word per line")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--policy", default="medium",
                   choices=["weak", "medium", "strong", "none"])

    p = sub.add_parser("pretrain", help="masked pre-training")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None, help="TOML-style config file")
    p.set_defaults(_keys=_add_config_options(p, PretrainConfig))

    p = sub.add_parser("finetune", help="train the text recognizer")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(_keys=_add_config_options(p, FinetuneConfig))

    p = sub.add_parser("evaluate", help="score a recognizer over labeled corpora")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", required=True, nargs="+")
    p.add_argument("--mode", default="waics", choices=list(evaluation.EVAL_MODES))
    p.add_argument("--out", default=None)

    p = sub.add_parser("ablate", help="run one ablation axis end to end")
    p.add_argument("--axis", required=True, choices=sorted(evaluation.ABLATION_AXES))
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--corpus-size", type=int, default=32)
    p.add_argument("--eval-size", type=int, default=32)
    p.add_argument("--pretrain-epochs", type=int, default=40)
    p.add_argument("--finetune-epochs", type=int, default=8)
    p.add_argument("--train-corpus", default=None,
                   help="reuse an existing corpus instead of generating one")
    p.add_argument("--eval-corpus", default=None, action="append")

    p = sub.add_parser("attmap", help="attention heatmaps for a query patch")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--query", required=True, metavar="ROW,COL")
    p.add_argument("--block", type=int, default=-1)
    p.add_argument("--out", required=True)
    p.add_argument("--compare", action="append", default=[],
                   metavar="NAME=CKPT", help="additional checkpoints to compare")
    return parser


def _cmd_gen_corpus(args) -> int:
    if args.count < 1:
        raise ConfigError(f"--count must be >= 1, got {args.count}")
    if not os.path.isfile(args.vocab):
        raise ConfigError(f"vocab file not found: {args.vocab}")
    with open(args.vocab, encoding="utf-8") as fh:
        vocab = [line.strip() for line in fh if line.strip()]
    if not vocab:
        raise ConfigError(f"vocab file {args.vocab} contains no words")
    started = time.time()
    policy = AugmentationPolicy.from_level(args.policy, seed=args.seed)
    manifest = generate_corpus(vocab, args.count, policy, args.seed, args.out)
    _write_run_record(args.out, "gen-corpus",
                      {"vocab": args.vocab, "count": args.count,
                       "policy": args.policy}, args.seed, started)
    print(f"wrote {manifest.count} images to {args.out}")
    return 0


def _cmd_pretrain(args) -> int:
    cfg, resolved = _resolve_config(args, args._keys, config_mod.build_pretrain_config)
    started = time.time()
    summary = train.pretrain(args.corpus, cfg, args.out)
    _write_run_record(args.out, "pretrain", resolved, cfg.seed, started)
    print(f"pretrained {summary['steps']} steps; "
          f"final total loss {summary['final_total']:.6f}")
    print(f"checkpoint: {summary['checkpoint']}")
    return 0


def _cmd_finetune(args) -> int:
    cfg, resolved = _resolve_config(args, args._keys, config_mod.build_finetune_config)
    started = time.time()
    summary = train.finetune(args.corpus, cfg, args.out)
    _write_run_record(args.out, "finetune", resolved, cfg.seed, started)
    print(f"finetuned {summary['steps']} steps; "
          f"train accuracy {summary['final_train_accuracy']:.3f}")
    print(f"checkpoint: {summary['checkpoint']}")
    return 0


def _cmd_evaluate(args) -> int:
    for d in args.corpus:
        if not os.path.isdir(d):
            raise ConfigError(f"corpus directory not found: {d}")
    if not os.path.isfile(args.checkpoint):
        raise ConfigError(f"checkpoint not found: {args.checkpoint}")
    started = time.time()
    report = evaluation.run_benchmark(args.checkpoint, args.corpus, mode=args.mode)
    print(report.to_csv(), end="")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.csv"), "w", encoding="utf-8") as fh:
            fh.write(report.to_csv())
        _write_run_record(args.out, "evaluate",
                          {"checkpoint": args.checkpoint, "corpus": args.corpus,
                           "mode": args.mode}, None, started)
    return 0


def _cmd_ablate(args) -> int:
    started = time.time()
    setup = evaluation.make_ablation_setup(
        args.out, seed=args.seed, corpus_size=args.corpus_size,
        eval_size=args.eval_size, pretrain_epochs=args.pretrain_epochs,
        finetune_epochs=args.finetune_epochs, train_corpus=args.train_corpus,
        eval_corpora=tuple(args.eval_corpus) if args.eval_corpus else None,
    )
    csv_path, rows = evaluation.run_ablation(args.axis, setup)
    _write_run_record(args.out, "ablate",
                      {"axis": args.axis, "rows": len(rows)}, args.seed, started)
    print(f"ablation table: {csv_path}")
    return 0


def _cmd_attmap(args) -> int:
    if not os.path.isfile(args.checkpoint):
        raise ConfigError(f"checkpoint not found: {args.checkpoint}")
    if not os.path.isfile(args.image):
        raise ConfigError(f"image not found: {args.image}")
    try:
        row, col = (int(v) for v in args.query.split(","))
    except ValueError:
        raise ConfigError(f"--query must be ROW,COL integers, got {args.query!r}")
    started = time.time()
    os.makedirs(args.out, exist_ok=True)
    image = load_image(args.image)
    pairs = [("main", args.checkpoint)]
    for spec_arg in args.compare:
        if "=" not in spec_arg:
            raise ConfigError(f"--compare expects NAME=CKPT, got {spec_arg!r}")
        name, path = spec_arg.split("=", 1)
        if not os.path.isfile(path):
            raise ConfigError(f"compare checkpoint not found: {path}")
        pairs.append((name, path))
    if len(pairs) == 1:
        amap = viz.extract_attention(args.checkpoint, image, (row, col),
                                     block=args.block)
        out_png = os.path.join(args.out, f"attmap_r{row}_c{col}.png")
        viz.render_heatmap(amap, image, out_png)
        print(f"main\t{viz.attention_entropy(amap):.6f}")
    else:
        out_png = os.path.join(args.out, f"attmap_compare_r{row}_c{col}.png")
        viz.compare_methods(pairs, image, (row, col), out_png, block=args.block)
    _write_run_record(args.out, "attmap",
                      {"checkpoint": args.checkpoint, "query": [row, col],
                       "block": args.block}, None, started)
    print(f"heatmap: {out_png}")
    return 0


_COMMANDS = {
    "gen-corpus": _cmd_gen_corpus,
    "pretrain": _cmd_pretrain,
    "finetune": _cmd_finetune,
    "evaluate": _cmd_evaluate,
    "ablate": _cmd_ablate,
    "attmap": _cmd_attmap,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    try:
        handler = _COMMANDS[args.command]
    except KeyError:  # unreachable with required subparsers; defensive
        print(parser.format_usage(), file=sys.stderr)
        return 1
    try:
        return handler(args)
    except (ConfigError, CharsetError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
