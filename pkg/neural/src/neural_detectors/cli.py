"""Command line: train a framework, run predictions."""

from __future__ import annotations

import argparse
import sys

from .frameworks import KINDS, FrameworkSpec
from .run import predict, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neural-detectors",
        description="Trainable omission-detection frameworks over labeled "
                    "dialogue-summarization corpora.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one framework on a labeled corpus")
    p.add_argument("--framework", choices=KINDS, required=True)
    p.add_argument("--input", required=True, help="labeled JSONL corpus")
    p.add_argument("--model-dir", required=True)
    p.add_argument("--encoder", default="tiny")
    p.add_argument("--max-len", type=int, default=256)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--learning-rate", type=float, default=5e-5)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="emit predictions JSONL for a corpus")
    p.add_argument("--model-dir", required=True)
    p.add_argument("--input", required=True, help="raw or labeled JSONL corpus")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_predict)
    return parser


def cmd_train(args) -> int:
    spec = FrameworkSpec(
        kind=args.framework,
        encoder=args.encoder,
        max_len=args.max_len,
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
    )
    manifest = train(args.input, args.model_dir, spec, seed=args.seed)
    print(f"trained {args.framework}: {manifest['batches']} batches, "
          f"loss {manifest['first_loss']:.4f} -> {manifest['last_loss']:.4f}",
          file=sys.stderr)
    return 0


def cmd_predict(args) -> int:
    n = predict(args.model_dir, args.input, args.output)
    print(f"wrote {n} prediction rows", file=sys.stderr)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 1 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
