"""Control-flow graph with artificial entry/sink, and simple-path enumeration.

Loops need no special handling: simple paths never repeat a node, which
yields one path skipping a loop body and one passing through it once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .isa import Label, Mem, Procedure, Reg


class CfgError(ValueError):
    pass


@dataclass
class Cfg:
    blocks: list  # list of BasicBlock, ids 0..n-1 in listing order
    edges: set  # (src_id, dst_id)
    entry_id: int
    sink_id: int
    unreachable: frozenset = frozenset()
    has_indirect_jump: bool = False

    def successors(self, block_id: int) -> list:
        return sorted(dst for src, dst in self.edges if src == block_id)


@dataclass(frozen=True)
class Path:
    blocks: tuple  # block ids, entry first, sink last
    instructions: tuple
    instr_blocks: tuple  # block id of each instruction, parallel to instructions

    def key(self):
        return tuple((i.mnemonic, i.operands) for i in self.instructions)


@dataclass
class PathSet:
    paths: list = field(default_factory=list)
    truncated: bool = False
    sink_unreachable: bool = False


def build_cfg(procedure: Procedure) -> Cfg:
    if not procedure.blocks:
        raise CfgError(f"procedure {procedure.name} has no blocks")
    n = len(procedure.blocks)
    entry_id, sink_id = n, n + 1
    index = procedure.block_index()
    edges = set()
    has_indirect = False

    for i, block in enumerate(procedure.blocks):
        last = block.instructions[-1] if block.instructions else None
        if last is None or not last.is_terminator:
            # fallthrough (calls included: they return and continue)
            if i + 1 >= n:
                raise CfgError(
                    f"block {block.label!r} in {procedure.name} falls off the end"
                )
            edges.add((i, i + 1))
        elif last.mnemonic == "ret":
            edges.add((i, sink_id))
        elif last.mnemonic == "jmp":
            target = last.operands[0] if last.operands else None
            if isinstance(target, Label) and target.name in index:
                edges.add((i, index[target.name]))
            elif isinstance(target, (Reg, Mem)):
                # target unknown statically; route to sink and flag
                edges.add((i, sink_id))
                has_indirect = True
            else:
                raise CfgError(f"bad jmp target in {procedure.name}")
        else:  # conditional jump: taken edge plus fallthrough
            target = last.operands[0] if last.operands else None
            if not isinstance(target, Label) or target.name not in index:
                raise CfgError(f"bad conditional jump target in {procedure.name}")
            edges.add((i, index[target.name]))
            if i + 1 >= n:
                raise CfgError(
                    f"block {block.label!r} in {procedure.name} falls off the end"
                )
            edges.add((i, i + 1))

    edges.add((entry_id, 0))

    reachable = {entry_id}
    stack = [entry_id]
    adjacency = {}
    for src, dst in edges:
        adjacency.setdefault(src, []).append(dst)
    while stack:
        node = stack.pop()
        for succ in adjacency.get(node, ()):
            if succ not in reachable:
                reachable.add(succ)
                stack.append(succ)
    unreachable = frozenset(i for i in range(n) if i not in reachable)

    return Cfg(
        blocks=list(procedure.blocks),
        edges=edges,
        entry_id=entry_id,
        sink_id=sink_id,
        unreachable=unreachable,
        has_indirect_jump=has_indirect,
    )


def _path_from_trace(cfg: Cfg, trace) -> Path:
    instructions = []
    instr_blocks = []
    for block_id in trace:
        if block_id in (cfg.entry_id, cfg.sink_id):
            continue
        for inst in cfg.blocks[block_id].instructions:
            instructions.append(inst)
            instr_blocks.append(block_id)
    return Path(
        blocks=tuple(trace),
        instructions=tuple(instructions),
        instr_blocks=tuple(instr_blocks),
    )


def enumerate_paths(cfg: Cfg, max_paths: int = 1000) -> PathSet:
    """All simple entry-to-sink paths, DFS with ascending successor order."""
    if max_paths < 1:
        raise ValueError("max_paths must be >= 1")
    successors = {}
    for src, dst in cfg.edges:
        successors.setdefault(src, []).append(dst)
    for lst in successors.values():
        lst.sort()

    result = PathSet()
    trace = [cfg.entry_id]
    on_path = {cfg.entry_id}
    # iterative DFS: stack of per-node successor cursors
    cursors = [0]
    while cursors:
        node = trace[-1]
        succs = successors.get(node, ())
        if cursors[-1] < len(succs):
            nxt = succs[cursors[-1]]
            cursors[-1] += 1
            if nxt in on_path:
                continue
            if nxt == cfg.sink_id:
                if len(result.paths) >= max_paths:
                    result.truncated = True
                    break
                result.paths.append(_path_from_trace(cfg, trace + [nxt]))
                continue
            trace.append(nxt)
            on_path.add(nxt)
            cursors.append(0)
        else:
            cursors.pop()
            on_path.discard(trace.pop())

    if not result.paths and not result.truncated:
        result.sink_unreachable = True
    return result


def compress_paths(pathset: PathSet) -> PathSet:
    """Drop paths whose instruction sequences duplicate an earlier path."""
    seen = set()
    kept = []
    for path in pathset.paths:
        key = path.key()
        if key in seen:
            continue
        seen.add(key)
        kept.append(path)
    return PathSet(
        paths=kept,
        truncated=pathset.truncated,
        sink_unreachable=pathset.sink_unreachable,
    )
