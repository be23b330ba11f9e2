"""Loading the analyzer's graphs.jsonl / paths.jsonl into model records."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Optional

MARKERS = ("entry", "sink", "unknown_internal", "unknown_indirect")

_WORD = re.compile(r"[a-zA-Z0-9]+")


def value_token(obj: dict) -> str:
    """Closed-vocabulary string for one serialized value."""
    kind, v = obj["kind"], obj["v"]
    if kind == "tag":
        return v
    if kind == "concrete_int":
        return str(v)
    words = _WORD.findall(v)
    return "STR:" + (words[0].lower() if words else "empty")


@dataclass
class CallSite:
    tokens: list  # callee subtokens, or a single marker token
    values: list  # value-token strings


@dataclass
class ProcRecord:
    proc_id: str
    package: str
    name_tokens: list
    nodes: list = field(default_factory=list)  # CallSite per graph node, markers included
    edges: list = field(default_factory=list)
    sequences: list = field(default_factory=list)  # lists of CallSite
    flags: dict = field(default_factory=dict)


def _callsite(callee, values) -> CallSite:
    tokens = [callee] if isinstance(callee, str) else list(callee)
    return CallSite(tokens=tokens, values=[value_token(v) for v in values or []])


def _iter_jsonl(path):
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path} line {lineno}: {exc}") from None


def load_corpus(graphs_path, paths_path) -> list:
    """Merge the two JSONL views into one record per procedure."""
    records = {}
    for row in _iter_jsonl(graphs_path):
        records[row["proc_id"]] = ProcRecord(
            proc_id=row["proc_id"],
            package=row["package"],
            name_tokens=list(row.get("name_tokens", [])),
            nodes=[_callsite(n["callee"], n.get("values")) for n in row["nodes"]],
            edges=[tuple(e) for e in row["edges"]],
            flags=row.get("flags", {}),
        )
    for row in _iter_jsonl(paths_path):
        record = records.get(row["proc_id"])
        if record is None:
            continue
        record.sequences = [
            [_callsite(cs["callee"], cs.get("values")) for cs in seq]
            for seq in row["sequences"]
        ]
    return [records[k] for k in sorted(records)]


def split_by_package(records, ratios=(8, 1, 1), seed=0):
    """Package-level split mirroring the analyzer CLI's policy (greedy fill)."""
    import random

    by_package = {}
    for record in records:
        by_package.setdefault(record.package, []).append(record)
    packages = sorted(by_package)
    rng = random.Random(seed)
    rng.shuffle(packages)
    total = sum(len(v) for v in by_package.values())
    ratio_total = sum(ratios)
    deficits = [total * r / ratio_total for r in ratios]
    splits = ([], [], [])
    for package in packages:
        k = max(range(3), key=lambda s: deficits[s])
        splits[k].extend(by_package[package])
        deficits[k] -= len(by_package[package])
    return splits
