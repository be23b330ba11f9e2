"""Dataset plumbing: records, JSONL serialization, package splits and
API-name obfuscation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from itertools import product
import random
from typing import Optional

from .isa import Label, Program
from .reprbuild import AnalysisResult
from .slicing import Value
from .tokens import subtokenize_name


def render_value_json(value: Value) -> dict:
    if value.kind == "int":
        return {"kind": "concrete_int", "v": value.int_value}
    if value.kind == "str":
        return {"kind": "concrete_str", "v": value.str_value}
    return {"kind": "tag", "v": value.tag}


def render_value_token(value: Value) -> str:
    """Closed-vocabulary rendering for learning."""
    if value.kind == "int":
        return str(value.int_value)
    if value.kind == "str":
        subtokens = subtokenize_name(value.str_value) if value.str_value else []
        return "STR:" + (subtokens[0] if subtokens else "empty")
    return value.tag


def value_from_json(obj: dict) -> Value:
    kind, v = obj["kind"], obj["v"]
    if kind == "concrete_int":
        return Value(kind="int", int_value=v)
    if kind == "concrete_str":
        return Value(kind="str", str_value=v)
    return Value(kind="tag", tag=v)


@dataclass
class ProcedureRecord:
    proc_id: str
    package: str
    name_tokens: list
    result: AnalysisResult
    flags: dict = field(default_factory=dict)


def _callsite_json(callee, values, include_values: bool, origin=None) -> dict:
    obj = {"callee": callee}
    if include_values:
        obj["values"] = [render_value_json(v) for v in values]
    if origin is not None:
        obj["origin"] = [origin[0], origin[1]]
    return obj


def graph_line(record: ProcedureRecord, include_values: bool = True) -> dict:
    graph = record.result.graph
    nodes = []
    for node in graph.nodes:
        obj = {"id": node.node_id, "callee": node.callee}
        if include_values:
            obj["values"] = [render_value_json(v) for v in node.values]
        nodes.append(obj)
    return {
        "proc_id": record.proc_id,
        "package": record.package,
        "name_tokens": record.name_tokens,
        "nodes": nodes,
        "edges": [[src, dst] for src, dst in sorted(graph.edges)],
        "flags": record.flags,
    }


def paths_line(record: ProcedureRecord, include_values: bool = True) -> dict:
    sequences = []
    for seq in record.result.sequences.sequences:
        sequences.append(
            [
                _callsite_json(
                    cs.callee_tokens[0]
                    if cs.is_unknown
                    else list(cs.callee_tokens),
                    cs.values,
                    include_values,
                    origin=cs.origin,
                )
                for cs in seq
            ]
        )
    return {
        "proc_id": record.proc_id,
        "package": record.package,
        "name_tokens": record.name_tokens,
        "sequences": sequences,
        "flags": record.flags,
    }


def dump_jsonl(objects) -> str:
    return "".join(json.dumps(obj, separators=(",", ":")) + "\n" for obj in objects)


def serialize(records, include_values: bool = True) -> tuple:
    """(graphs.jsonl text, paths.jsonl text), line order = record order."""
    graphs = dump_jsonl(graph_line(r, include_values) for r in records)
    paths = dump_jsonl(paths_line(r, include_values) for r in records)
    return graphs, paths


def load_jsonl(text: str) -> list:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {lineno}: bad JSON ({exc})") from None
    return out


# --- package-level dataset splitting ----------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    ratios: tuple = (8, 1, 1)  # train : valid : test

    def __post_init__(self):
        if len(self.ratios) != 3 or any(r <= 0 for r in self.ratios):
            raise ValueError("ratios must be three positive numbers")


def _assignment_deviation(sizes, assignment, ratios, total):
    split_counts = [0, 0, 0]
    for size, split in zip(sizes, assignment):
        split_counts[split] += size
    ratio_total = sum(ratios)
    return sum(
        abs(split_counts[s] - total * ratios[s] / ratio_total) for s in range(3)
    )


def split_dataset(records, spec: SplitSpec, seed: int):
    """Assign whole packages to train/valid/test, approaching the ratios by
    record count. Small package counts are solved exactly; larger ones use a
    greedy fill over the seeded shuffle order."""
    by_package: dict = {}
    for record in records:
        package = record["package"] if isinstance(record, dict) else record.package
        by_package.setdefault(package, []).append(record)
    packages = sorted(by_package)
    if len(packages) < 3:
        raise ValueError("need at least as many packages as splits")
    rng = random.Random(seed)
    rng.shuffle(packages)
    sizes = [len(by_package[p]) for p in packages]
    total = sum(sizes)

    if len(packages) <= 10:
        best = None
        best_key = None
        for assignment in product(range(3), repeat=len(packages)):
            if len(set(assignment)) < 3:
                continue
            deviation = _assignment_deviation(sizes, assignment, spec.ratios, total)
            key = (deviation, assignment)
            if best_key is None or key < best_key:
                best_key = key
                best = assignment
        assignment = best
    else:
        ratio_total = sum(spec.ratios)
        deficits = [total * r / ratio_total for r in spec.ratios]
        assignment = []
        for size in sizes:
            split = max(range(3), key=lambda s: deficits[s])
            assignment.append(split)
            deficits[split] -= size

    splits = ([], [], [])
    for package, split in zip(packages, assignment):
        splits[split].extend(by_package[package])
    return splits


# --- API name obfuscation ----------------------------------------------------


def obfuscate_program(program: Program) -> Program:
    """Replace import names with placeholders and drop declared arities.

    Argument values are untouched: the call semantics must survive even when
    the names do not.
    """
    mapping = {}
    for k, name in enumerate(program.imports):
        mapping[name] = f"obf_{k}"

    def rewrite_operand(op):
        if isinstance(op, Label) and op.name in mapping:
            return Label(mapping[op.name])
        return op

    new_program = Program(
        imports={mapping[name]: None for name in program.imports},
        strings=dict(program.strings),
    )
    for proc in program.procedures:
        new_proc = replace(proc, blocks=[])
        for block in proc.blocks:
            new_block = replace(block, instructions=[])
            for inst in block.instructions:
                new_block.instructions.append(
                    replace(
                        inst,
                        operands=tuple(rewrite_operand(op) for op in inst.operands),
                    )
                )
            new_proc.blocks.append(new_block)
        new_program.procedures.append(new_proc)
    return new_program
