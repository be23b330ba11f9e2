"""Assemble augmented call sites into per-procedure sequences and graphs.

Each call origin (block id, instruction index) keeps one prototype but may
appear with different argument values on different paths; the graph keeps
one duplicate node per distinct value combination (capped), while the
sequence view keeps per-path call-site lists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .callsites import (
    LIBRARY_DEBUG,
    UNKNOWN_INDIRECT,
    UNKNOWN_INTERNAL,
    CallSiteProto,
    classify_target,
    reconstruct_callsite,
    resolve_arity,
)
from .cfg import Cfg, Path, PathSet, build_cfg, compress_paths, enumerate_paths
from .isa import Procedure, Program
from .slicing import ProcContext, Value, resolve_value, tag, TAG_EMPTY
from .tokens import subtokenize_name

DUPLICATION_CAP = 8
DEFAULT_MAX_SEQ_LEN = 60
ENTRY_MARKER = "entry"
SINK_MARKER = "sink"


@dataclass(frozen=True)
class AugmentedCallSite:
    callee_tokens: tuple  # lowercase subtokens, or a single unknown marker
    values: tuple  # tuple of Value, length == arity
    origin: tuple  # (block_id, seq_index)

    @property
    def is_unknown(self) -> bool:
        return self.callee_tokens in (("unknown_internal",), ("unknown_indirect",))


@dataclass
class GraphNode:
    node_id: int
    callee: object  # list of tokens or marker string
    values: tuple
    origin: Optional[tuple] = None


@dataclass
class AugmentedGraph:
    nodes: list = field(default_factory=list)
    edges: set = field(default_factory=set)
    duplication_groups: dict = field(default_factory=dict)  # origin -> [node ids]
    duplication_truncated: bool = False
    entry_id: int = 0
    sink_id: int = 1

    def callsite_nodes(self):
        return [n for n in self.nodes if n.origin is not None]


@dataclass
class SequenceSet:
    sequences: list = field(default_factory=list)  # lists of AugmentedCallSite
    truncated: bool = False


def _marker_tokens(display_name: str) -> tuple:
    if display_name == UNKNOWN_INTERNAL:
        return ("unknown_internal",)
    if display_name == UNKNOWN_INDIRECT:
        return ("unknown_indirect",)
    return tuple(subtokenize_name(display_name))


def resolve_protos(paths, program: Program, mode: str = LIBRARY_DEBUG) -> dict:
    """Per-origin call-site prototypes, arity summarized as max across paths."""
    targets: dict = {}
    arities: dict = {}
    unknown_flags: dict = {}
    for path in paths:
        for pos, inst in enumerate(path.instructions):
            if not inst.is_call:
                continue
            origin = (path.instr_blocks[pos], inst.seq_index)
            target = classify_target(inst, program, path, pos)
            previous = targets.get(origin)
            if previous is None or (previous.kind == "indirect" and target.kind != "indirect"):
                targets[origin] = target
            arity, unknown = resolve_arity(target, program, path, pos, mode)
            arities[origin] = max(arities.get(origin, 0), arity)
            unknown_flags[origin] = unknown_flags.get(origin, False) or unknown
    return {
        origin: reconstruct_callsite(targets[origin], arities[origin], unknown_flags[origin])
        for origin in targets
    }


def augment_path(path: Path, protos: dict, ctx: ProcContext) -> list:
    """One augmented call site per call on the path, in path order."""
    out = []
    for pos, inst in enumerate(path.instructions):
        if not inst.is_call:
            continue
        origin = (path.instr_blocks[pos], inst.seq_index)
        proto = protos[origin]
        values = tuple(
            resolve_value(path, pos, reg, ctx) for reg in proto.arg_registers
        )
        out.append(
            AugmentedCallSite(
                callee_tokens=_marker_tokens(proto.display_name),
                values=values,
                origin=origin,
            )
        )
    return out


def listing_order_callsites(
    procedure: Procedure, program: Program, mode: str = LIBRARY_DEBUG
) -> list:
    """Call sites in raw listing order, no CFG: one straight-line pseudo-path."""
    instructions = tuple(procedure.instructions())
    pseudo = Path(
        blocks=(),
        instructions=instructions,
        instr_blocks=tuple(
            block_id
            for block_id, block in enumerate(procedure.blocks)
            for _ in block.instructions
        ),
    )
    protos = resolve_protos([pseudo], program, mode)
    ctx = ProcContext(program=program, arg_count=procedure.arg_count)
    return augment_path(pseudo, protos, ctx)


def _empty_block_closure(cfg: Cfg, occupied: set) -> dict:
    """For each node, the set of occupied nodes (or sink) first reached forward."""
    closure = {}

    def targets_from(block_id, visited):
        result = set()
        for succ in cfg.successors(block_id):
            if succ == cfg.sink_id or succ in occupied:
                result.add(succ)
            elif succ not in visited:
                visited.add(succ)
                result |= targets_from(succ, visited)
        return result

    for block_id in list(occupied) + [cfg.entry_id]:
        closure[block_id] = targets_from(block_id, {block_id})
    return closure


def build_augmented_graph(cfg: Cfg, per_path_callsites: list) -> AugmentedGraph:
    """Chain call sites inside blocks, collapse call-free blocks, duplicate
    per distinct value combination observed across paths (cap 8)."""
    graph = AugmentedGraph()
    graph.nodes.append(GraphNode(node_id=0, callee=ENTRY_MARKER, values=()))
    graph.nodes.append(GraphNode(node_id=1, callee=SINK_MARKER, values=()))

    # distinct value vectors per origin, in path order
    variants: dict = {}
    callee_of: dict = {}
    for callsites in per_path_callsites:
        for cs in callsites:
            bucket = variants.setdefault(cs.origin, [])
            if cs.values not in bucket:
                if len(bucket) >= DUPLICATION_CAP:
                    graph.duplication_truncated = True
                else:
                    bucket.append(cs.values)
            callee_of.setdefault(cs.origin, cs.callee_tokens)

    # per-block ordered call origins
    block_origins: dict = {}
    for origin in sorted(variants):
        block_origins.setdefault(origin[0], []).append(origin)

    next_id = 2
    for origin in sorted(variants):
        ids = []
        for values in variants[origin]:
            tokens = callee_of[origin]
            callee = tokens[0] if tokens in (("unknown_internal",), ("unknown_indirect",)) else list(tokens)
            graph.nodes.append(
                GraphNode(node_id=next_id, callee=callee, values=values, origin=origin)
            )
            ids.append(next_id)
            next_id += 1
        graph.duplication_groups[origin] = ids

    # chain consecutive origins within a block
    for origins in block_origins.values():
        for a, b in zip(origins, origins[1:]):
            for src in graph.duplication_groups[a]:
                for dst in graph.duplication_groups[b]:
                    graph.edges.add((src, dst))

    occupied = set(block_origins)
    closure = _empty_block_closure(cfg, occupied)

    def entry_nodes(block_id):
        return graph.duplication_groups[block_origins[block_id][0]]

    def exit_nodes(block_id):
        return graph.duplication_groups[block_origins[block_id][-1]]

    for target in sorted(closure.get(cfg.entry_id, ())):
        dsts = [graph.sink_id] if target == cfg.sink_id else entry_nodes(target)
        for dst in dsts:
            graph.edges.add((graph.entry_id, dst))
    for block_id in sorted(occupied):
        for target in sorted(closure.get(block_id, ())):
            dsts = [graph.sink_id] if target == cfg.sink_id else entry_nodes(target)
            for src in exit_nodes(block_id):
                for dst in dsts:
                    graph.edges.add((src, dst))
    if not occupied:
        graph.edges.add((graph.entry_id, graph.sink_id))
    return graph


def to_sequences(per_path_callsites: list, max_len: int = DEFAULT_MAX_SEQ_LEN) -> SequenceSet:
    """Truncate per-path call-site lists to ``max_len`` and deduplicate."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    result = SequenceSet()
    seen = set()
    for callsites in per_path_callsites:
        seq = callsites[:max_len]
        if len(callsites) > max_len:
            result.truncated = True
        key = tuple((cs.callee_tokens, cs.values) for cs in seq)
        if key in seen:
            continue
        seen.add(key)
        result.sequences.append(seq)
    return result


@dataclass
class AnalysisResult:
    procedure: Procedure
    cfg: Cfg
    pathset: PathSet
    per_path_callsites: list
    graph: AugmentedGraph
    sequences: SequenceSet
    flags: dict


def analyze_procedure(
    procedure: Procedure,
    program: Program,
    mode: str = LIBRARY_DEBUG,
    max_paths: int = 1000,
    max_seq_len: int = DEFAULT_MAX_SEQ_LEN,
) -> AnalysisResult:
    """Full pipeline for one procedure: CFG, paths, slicing, graph, sequences."""
    cfg = build_cfg(procedure)
    pathset = compress_paths(enumerate_paths(cfg, max_paths=max_paths))
    ctx = ProcContext(program=program, arg_count=procedure.arg_count)
    protos = resolve_protos(pathset.paths, program, mode)
    per_path = [augment_path(path, protos, ctx) for path in pathset.paths]
    graph = build_augmented_graph(cfg, per_path)
    sequences = to_sequences(per_path, max_len=max_seq_len)
    flags = {
        "paths_truncated": pathset.truncated,
        "sink_unreachable": pathset.sink_unreachable,
        "sequences_truncated": sequences.truncated,
        "duplication_truncated": graph.duplication_truncated,
        "unknown_arity": any(p.unknown_arity for p in protos.values()),
        "has_indirect_jump": cfg.has_indirect_jump,
        "unreachable_blocks": len(cfg.unreachable),
    }
    return AnalysisResult(
        procedure=procedure,
        cfg=cfg,
        pathset=pathset,
        per_path_callsites=per_path,
        graph=graph,
        sequences=sequences,
        flags=flags,
    )
