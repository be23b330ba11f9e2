"""CLI: train on analyzer JSONL, emit predictions JSONL."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import torch

from .data import load_corpus
from .model import ARCHS, NameModel
from .train import Hyperparameters, TrainError, predict_records, train_model
from .vocab import Vocab


def cmd_train(args):
    records = load_corpus(args.graphs, args.paths)
    val_records = None
    if args.val_graphs:
        val_records = load_corpus(args.val_graphs, args.val_paths)
    hp = Hyperparameters(
        lr=args.lr,
        decay=args.decay,
        batch_size=args.batch_size,
        epochs=args.epochs,
        d=args.d,
        dropout=args.dropout,
        seed=args.seed,
        no_values=args.no_values,
        target_f1=args.target_f1,
    )
    model, vocab, history = train_model(records, args.arch, hp, val_records)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.save(
        {
            "state_dict": model.state_dict(),
            "vocab": {
                "name_ids": vocab.name_ids,
                "value_ids": vocab.value_ids,
                "out_ids": vocab.out_ids,
            },
            "config": {"arch": args.arch, "d": args.d, "no_values": args.no_values},
        },
        out_dir / "model.pt",
    )
    (out_dir / "history.json").write_text(json.dumps(history, indent=2))
    print(f"final val F1: {history[-1]['val_f1']:.4f} ({len(history)} epochs)")


def load_model(path):
    bundle = torch.load(path, weights_only=False)
    vocab = Vocab(**bundle["vocab"])
    config = bundle["config"]
    model = NameModel(vocab, config["arch"], d=config["d"])
    model.load_state_dict(bundle["state_dict"])
    return model, vocab, config


def cmd_predict(args):
    model, vocab, config = load_model(args.model)
    records = load_corpus(args.graphs, args.paths)
    rows = predict_records(model, vocab, records, no_values=config["no_values"])
    with open(args.out, "w") as handle:
        for row in rows:
            handle.write(json.dumps(row, separators=(",", ":")) + "\n")
    print(f"wrote {len(rows)} predictions to {args.out}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bincall-neural", description="Procedure-name prediction models"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train")
    p.add_argument("--graphs", required=True)
    p.add_argument("--paths", required=True)
    p.add_argument("--val-graphs")
    p.add_argument("--val-paths")
    p.add_argument("--arch", choices=ARCHS, required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--decay", type=float, default=0.95)
    p.add_argument("--d", type=int, default=128)
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-values", action="store_true")
    p.add_argument("--target-f1", type=float)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict")
    p.add_argument("--model", required=True)
    p.add_argument("--graphs", required=True)
    p.add_argument("--paths", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (TrainError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
