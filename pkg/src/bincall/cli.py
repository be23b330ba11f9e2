"""Command-line interface: analyze / score / synth / split / stats."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .callsites import LIBRARY_DEBUG, NO_LIBRARY_DEBUG
from .corpus import (
    ProcedureRecord,
    SplitSpec,
    dump_jsonl,
    graph_line,
    load_jsonl,
    obfuscate_program,
    paths_line,
    split_dataset,
)
from .metrics import aggregate_corpus, score_pair
from .parser import parse_listing
from .reprbuild import analyze_procedure, listing_order_callsites, to_sequences
from .synth import generate_synthetic_corpus
from .tokens import subtokenize_name


def _input_files(path: Path) -> list:
    if path.is_dir():
        return sorted(path.glob("*.nal"))
    return [path]


def _analyze_records(args):
    records = []
    for file_path in _input_files(Path(args.input)):
        program = parse_listing(file_path.read_text())
        if args.obfuscate:
            program = obfuscate_program(program)
        package = file_path.stem
        mode = NO_LIBRARY_DEBUG if args.no_library_debug else LIBRARY_DEBUG
        for proc in program.procedures:
            result = analyze_procedure(
                proc,
                program,
                mode=mode,
                max_paths=args.max_paths,
                max_seq_len=args.max_seq_len,
            )
            if args.assembly_order:
                # ablation: one sequence, call sites in raw listing order
                listing = listing_order_callsites(proc, program, mode)
                result.sequences = to_sequences([listing], max_len=args.max_seq_len)
            name_tokens = [] if proc.is_anonymous else subtokenize_name(proc.name)
            flags = dict(result.flags)
            if not name_tokens:
                flags["unlabeled"] = True
            records.append(
                ProcedureRecord(
                    proc_id=f"{package}/{proc.name}",
                    package=package,
                    name_tokens=name_tokens,
                    result=result,
                    flags=flags,
                )
            )
    return records


def cmd_analyze(args):
    records = _analyze_records(args)
    include_values = not args.no_values
    Path(args.out_graphs).write_text(
        dump_jsonl(graph_line(r, include_values) for r in records)
    )
    Path(args.out_paths).write_text(
        dump_jsonl(paths_line(r, include_values) for r in records)
    )
    print(f"analyzed {len(records)} procedures")


def cmd_score(args):
    preds = {obj["proc_id"]: obj for obj in load_jsonl(Path(args.pred).read_text())}
    truths = load_jsonl(Path(args.truth).read_text())
    counts = []
    for truth in truths:
        truth_tokens = truth.get("name_tokens") or truth.get("pred_tokens") or []
        if not truth_tokens:
            continue
        pred_tokens = preds.get(truth["proc_id"], {}).get("pred_tokens", [])
        counts.append(score_pair(pred_tokens, truth_tokens))
    report = {
        "examples": len(counts),
        "micro": aggregate_corpus(counts),
        "macro": aggregate_corpus(counts, macro=True),
    }
    print(json.dumps(report, indent=2))


def cmd_synth(args):
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    packages = generate_synthetic_corpus(args.seed, args.count)
    for name, text in packages:
        (out_dir / f"{name}.nal").write_text(text)
    total = sum(text.count(".proc ") for _, text in packages)
    print(f"wrote {len(packages)} packages ({total} procedures) to {out_dir}")


def cmd_split(args):
    ratios = tuple(int(part) for part in args.ratio.split(":"))
    records = load_jsonl(Path(args.input).read_text())
    train, valid, test = split_dataset(records, SplitSpec(ratios=ratios), args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).name
    for split_name, split_records in (("train", train), ("valid", valid), ("test", test)):
        (out_dir / f"{split_name}.{stem}").write_text(dump_jsonl(split_records))
    print(
        f"split {len(records)} records into "
        f"{len(train)}/{len(valid)}/{len(test)} (train/valid/test)"
    )


def cmd_stats(args):
    rows = load_jsonl(Path(args.input).read_text())
    n = len(rows)
    if n == 0:
        print(json.dumps({"procedures": 0}))
        return
    stats = {"procedures": n}
    if rows and "nodes" in rows[0]:
        node_counts = [len(r["nodes"]) - 2 for r in rows]  # entry/sink excluded
        stats["avg_nodes"] = sum(node_counts) / n
        stats["avg_edges"] = sum(len(r["edges"]) for r in rows) / n
    if rows and "sequences" in rows[0]:
        seq_counts = [len(r["sequences"]) for r in rows]
        lengths = [len(s) for r in rows for s in r["sequences"]]
        stats["avg_sequences"] = sum(seq_counts) / n
        stats["avg_sequence_length"] = (
            sum(lengths) / len(lengths) if lengths else 0.0
        )
    stats["avg_name_tokens"] = sum(len(r.get("name_tokens", [])) for r in rows) / n
    print(json.dumps(stats, indent=2))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bincall",
        description="Augmented call-site representations for binary procedures",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="analyze NAL listings into JSONL datasets")
    p.add_argument("--input", required=True, help="NAL file or directory of *.nal")
    p.add_argument("--out-graphs", required=True)
    p.add_argument("--out-paths", required=True)
    p.add_argument("--obfuscate", action="store_true", help="simulate API name obfuscation")
    p.add_argument("--no-library-debug", action="store_true",
                   help="ignore declared import arities; infer from caller code")
    p.add_argument("--no-values", action="store_true",
                   help="emit callee tokens only (no concrete/abstract values)")
    p.add_argument("--assembly-order", action="store_true",
                   help="sequences in raw listing order instead of CFG order")
    p.add_argument("--max-paths", type=int, default=1000)
    p.add_argument("--max-seq-len", type=int, default=60)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("score", help="score prediction JSONL against truth JSONL")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("synth", help="generate a synthetic NAL corpus")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("split", help="package-level train/valid/test split")
    p.add_argument("--input", required=True, help="graphs.jsonl or paths.jsonl")
    p.add_argument("--ratio", default="8:1:1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("stats", help="per-procedure dataset statistics")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
