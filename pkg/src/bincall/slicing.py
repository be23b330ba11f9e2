"""Pointer-aware backward slicing of argument registers along one path.

A slice starts at (call index, register) and alternates between register
last-writes and memory last-writes until nothing remains. Call instructions
are slice leaves (their result is an opaque return value), so slicing never
continues past them. Memory last-writes match by syntactic equality of the
canonicalized address expression.

The propagated sink value is the best value reaching the sink under the
preference order concrete > ARG > GLOBAL > RET > STK > EMPTY; constant
chains are folded away first by re-optimization.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .effects import StackSlot, effect_sets
from .isa import (
    ABI_ARG_REGISTERS,
    Imm,
    Instruction,
    Label,
    Mem,
    MemExpr,
    Program,
    Reg,
    StrRef,
)

TAG_ARG = "ARG"
TAG_GLOBAL = "GLOBAL"
TAG_RET = "RET"
TAG_STK = "STK"
TAG_EMPTY = "EMPTY"

_STRING_TRUNCATE = 32


@dataclass(frozen=True)
class Value:
    """A concrete value or an abstract tag."""

    kind: str  # 'int' | 'str' | 'tag'
    int_value: Optional[int] = None
    str_value: Optional[str] = None
    tag: Optional[str] = None
    overflowed: bool = False

    @property
    def is_concrete(self) -> bool:
        return self.kind in ("int", "str")

    def preference(self) -> int:
        if self.is_concrete:
            return 0
        return {TAG_ARG: 1, TAG_GLOBAL: 2, TAG_RET: 3, TAG_STK: 4, TAG_EMPTY: 5}[self.tag]


def concrete_int(value: int, overflowed: bool = False) -> Value:
    return Value(kind="int", int_value=value, overflowed=overflowed)


def concrete_str(value: str) -> Value:
    return Value(kind="str", str_value=value[:_STRING_TRUNCATE])


def tag(name: str) -> Value:
    return Value(kind="tag", tag=name)


def best_value(values) -> Value:
    """Highest-preference value; EMPTY only wins when nothing else is there."""
    values = list(values)
    if not values:
        return tag(TAG_EMPTY)
    return min(values, key=lambda v: v.preference())


@dataclass(frozen=True)
class SliceNode:
    kind: str  # 'inst' | 'leaf'
    inst: Optional[Instruction] = None
    path_pos: Optional[int] = None  # index into path.instructions
    value: Optional[Value] = None  # leaves only
    children: tuple = ()  # tuple of (role, SliceNode)

    def node_count(self) -> int:
        return 1 + sum(child.node_count() for _, child in self.children)

    def leaves(self):
        if self.kind == "leaf":
            yield self
        for _, child in self.children:
            yield from child.leaves()


@dataclass(frozen=True)
class SliceTree:
    sink_register: str
    call_pos: int
    root: SliceNode


@dataclass
class ProcContext:
    """Path-independent facts the slicer needs about the enclosing procedure."""

    program: Program
    arg_count: Optional[int] = None

    def arg_registers(self) -> tuple:
        if self.arg_count is None:
            return ABI_ARG_REGISTERS
        return ABI_ARG_REGISTERS[: self.arg_count]


class _PathIndex:
    """Last-write tables and stack-depth-resolved effects for one path."""

    def __init__(self, path):
        self.path = path
        self.effects = []
        depth = 0
        for inst in path.instructions:
            self.effects.append(effect_sets(inst, stack_depth=depth))
            if inst.mnemonic == "push":
                depth += 1
            elif inst.mnemonic == "pop":
                depth = max(0, depth - 1)

    def v_last_write(self, pos: int, register: str) -> Optional[int]:
        for j in range(pos - 1, -1, -1):
            if register in self.effects[j].v_write:
                return j
        return None

    def p_last_write(self, pos: int, pointer) -> Optional[int]:
        for j in range(pos - 1, -1, -1):
            if pointer in self.effects[j].p_write:
                return j
        return None


_PATH_INDEX_CACHE: dict = {}


def _index_for(path) -> _PathIndex:
    key = id(path)
    cached = _PATH_INDEX_CACHE.get(key)
    if cached is None or cached.path is not path:
        cached = _PathIndex(path)
        _PATH_INDEX_CACHE[key] = cached
        if len(_PATH_INDEX_CACHE) > 256:
            _PATH_INDEX_CACHE.clear()
            _PATH_INDEX_CACHE[key] = cached
    return cached


def _register_leaf(register: str, ctx: ProcContext) -> SliceNode:
    if register in ctx.arg_registers():
        return SliceNode(kind="leaf", value=tag(TAG_ARG))
    if register in ("rbp", "rsp"):
        return SliceNode(kind="leaf", value=tag(TAG_STK))
    return SliceNode(kind="leaf", value=tag(TAG_EMPTY))


def _pointer_leaf(pointer, ctx: ProcContext) -> SliceNode:
    if isinstance(pointer, StackSlot):
        return SliceNode(kind="leaf", value=tag(TAG_STK))
    if isinstance(pointer, MemExpr):
        if pointer.base in ("rbp", "rsp") or pointer.index in ("rbp", "rsp"):
            return SliceNode(kind="leaf", value=tag(TAG_STK))
        return SliceNode(kind="leaf", value=tag(TAG_GLOBAL))
    return SliceNode(kind="leaf", value=tag(TAG_GLOBAL))


def _value_leaf(item, ctx: ProcContext) -> SliceNode:
    if isinstance(item, int):
        return SliceNode(kind="leaf", value=concrete_int(item))
    if isinstance(item, StrRef):
        content = ctx.program.strings.get(item.ident)
        if content is not None:
            return SliceNode(kind="leaf", value=concrete_str(content))
        return SliceNode(kind="leaf", value=tag(TAG_GLOBAL))
    if isinstance(item, Label):
        # code/data address of a named symbol
        return SliceNode(kind="leaf", value=tag(TAG_GLOBAL))
    raise TypeError(f"unexpected value item {item!r}")


def _trace_register(index: _PathIndex, pos: int, register: str, ctx, memo) -> SliceNode:
    j = index.v_last_write(pos, register)
    if j is None:
        return _register_leaf(register, ctx)
    return _node_for(index, j, ctx, memo)


def _trace_pointer(index: _PathIndex, pos: int, pointer, ctx, memo) -> SliceNode:
    j = index.p_last_write(pos, pointer)
    if j is None:
        return _pointer_leaf(pointer, ctx)
    return _node_for(index, j, ctx, memo)


def _node_for(index: _PathIndex, pos: int, ctx, memo) -> SliceNode:
    if pos in memo:
        return memo[pos]
    inst = index.path.instructions[pos]
    if inst.is_call:
        # slicing stops at calls; their value is an opaque return
        node = SliceNode(kind="inst", inst=inst, path_pos=pos, children=())
        memo[pos] = node
        return node

    children = []
    effects = index.effects[pos]
    seen_regs = set()
    for op_role, item in _read_items(inst, effects):
        if op_role == "reg":
            if item in seen_regs:
                continue
            seen_regs.add(item)
            children.append(("reg:" + item, _trace_register(index, pos, item, ctx, memo)))
        elif op_role == "ptr":
            children.append(("ptr", _trace_pointer(index, pos, item, ctx, memo)))
        else:
            children.append(("value", _value_leaf(item, ctx)))
    node = SliceNode(kind="inst", inst=inst, path_pos=pos, children=tuple(children))
    memo[pos] = node
    return node


def _read_items(inst: Instruction, effects):
    """Deterministic ordering of an instruction's read dependencies."""
    items = []
    for value in effects.v_read:
        if isinstance(value, str):
            items.append(("reg", value))
        else:
            items.append(("value", value))
    for pointer in effects.p_read:
        items.append(("ptr", pointer))

    def sort_key(entry):
        role, item = entry
        return (role, repr(item))

    return sorted(items, key=sort_key)


def slice_register(path, call_pos: int, register: str, ctx: ProcContext) -> SliceTree:
    """Backward pointer-aware slice of ``register`` at ``call_pos`` on ``path``."""
    index = _index_for(path)
    memo: dict = {}
    root = _trace_register(index, call_pos, register, ctx, memo)
    return SliceTree(sink_register=register, call_pos=call_pos, root=root)


# --- re-optimization (constant folding) -------------------------------------

_U64 = 1 << 64
_S64_MAX = (1 << 63) - 1


def _wrap(value: int) -> tuple:
    wrapped = value % _U64
    if wrapped > _S64_MAX:
        wrapped -= _U64
    return wrapped, wrapped != value


def _child(node: SliceNode, role_prefix: str) -> Optional[SliceNode]:
    for role, child in node.children:
        if role == role_prefix or role.startswith(role_prefix):
            return child
    return None


def _concrete_of(node: Optional[SliceNode]) -> Optional[int]:
    if node is not None and node.kind == "leaf" and node.value.kind == "int":
        return node.value.int_value
    return None


def _fold(node: SliceNode) -> Optional[Value]:
    """Concrete value of an instruction node, or None if not foldable."""
    inst = node.inst
    m = inst.mnemonic
    ops = inst.operands

    def src_value():
        src = ops[1] if len(ops) > 1 else None
        if isinstance(src, Imm):
            return src.value
        if isinstance(src, Reg):
            return _concrete_of(_child(node, "reg:" + src.name))
        if isinstance(src, Mem):
            return _concrete_of(_child(node, "ptr"))
        return None

    if m == "mov" and len(ops) == 2 and isinstance(ops[0], Reg):
        src = ops[1]
        if isinstance(src, Imm):
            return concrete_int(src.value)
        if isinstance(src, Reg):
            folded = _concrete_of(_child(node, "reg:" + src.name))
            return concrete_int(folded) if folded is not None else None
        if isinstance(src, Mem):
            folded = _concrete_of(_child(node, "ptr"))
            return concrete_int(folded) if folded is not None else None
        if isinstance(src, StrRef):
            leaf = _child(node, "value")
            if leaf is not None and leaf.value.kind == "str":
                return leaf.value
        return None
    if m == "mov" and len(ops) == 2 and isinstance(ops[0], Mem):
        # a store's produced value is the value stored
        src = ops[1]
        if isinstance(src, Imm):
            return concrete_int(src.value)
        if isinstance(src, Reg):
            folded = _concrete_of(_child(node, "reg:" + src.name))
            return concrete_int(folded) if folded is not None else None
        return None
    if m == "push" and len(ops) == 1:
        src = ops[0]
        if isinstance(src, Imm):
            return concrete_int(src.value)
        if isinstance(src, Reg):
            folded = _concrete_of(_child(node, "reg:" + src.name))
            return concrete_int(folded) if folded is not None else None
        return None
    if m == "pop" and len(ops) == 1 and isinstance(ops[0], Reg):
        folded = _concrete_of(_child(node, "ptr"))
        return concrete_int(folded) if folded is not None else None
    if m == "xor" and len(ops) == 2 and ops[0] == ops[1] and isinstance(ops[0], Reg):
        return concrete_int(0)
    if m in ("add", "sub", "xor", "and", "or", "shl", "shr", "imul") and len(ops) == 2:
        if not isinstance(ops[0], Reg):
            return None
        dst_val = _concrete_of(_child(node, "reg:" + ops[0].name))
        rhs = src_value()
        if dst_val is None or rhs is None:
            return None
        if m == "add":
            result = dst_val + rhs
        elif m == "sub":
            result = dst_val - rhs
        elif m == "xor":
            result = dst_val ^ rhs
        elif m == "and":
            result = dst_val & rhs
        elif m == "or":
            result = dst_val | rhs
        elif m == "shl":
            result = dst_val << (rhs & 63)
        elif m == "shr":
            result = (dst_val % _U64) >> (rhs & 63)
        else:  # imul
            result = dst_val * rhs
        wrapped, overflow = _wrap(result)
        return concrete_int(wrapped, overflowed=overflow)
    if m in ("inc", "dec", "neg") and len(ops) == 1 and isinstance(ops[0], Reg):
        prev = _concrete_of(_child(node, "reg:" + ops[0].name))
        if prev is None:
            return None
        result = prev + 1 if m == "inc" else prev - 1 if m == "dec" else -prev
        wrapped, overflow = _wrap(result)
        return concrete_int(wrapped, overflowed=overflow)
    if m == "lea" and len(ops) == 2 and isinstance(ops[0], Reg) and isinstance(ops[1], Mem):
        expr = ops[1].expr
        total = expr.disp
        if expr.base is not None:
            base_val = _concrete_of(_child(node, "reg:" + expr.base))
            if base_val is None:
                return None
            total += base_val
        if expr.index is not None:
            idx_val = _concrete_of(_child(node, "reg:" + expr.index))
            if idx_val is None:
                return None
            total += idx_val * expr.scale
        wrapped, overflow = _wrap(total)
        return concrete_int(wrapped, overflowed=overflow)
    return None


def _reoptimize_node(node: SliceNode) -> SliceNode:
    if node.kind == "leaf":
        # a leaf holding an immediate is already in folded form
        return node
    if node.inst.is_call:
        return node
    new_children = tuple(
        (role, _reoptimize_node(child)) for role, child in node.children
    )
    node = replace(node, children=new_children)
    folded = _fold(node)
    if folded is not None:
        return SliceNode(kind="leaf", value=folded)
    return node


def reoptimize_slice(tree: SliceTree) -> SliceTree:
    """Collapse straight-line constant computation into concrete leaves."""
    return replace(tree, root=_reoptimize_node(tree.root))


# --- tag assignment and propagation -----------------------------------------


def _propagate(node: SliceNode) -> Value:
    if node.kind == "leaf":
        return node.value
    if node.inst.is_call:
        return tag(TAG_RET)
    return best_value(_propagate(child) for _, child in node.children)


def assign_and_propagate(tree: SliceTree, ctx: ProcContext = None) -> Value:
    """Sink value under the preference order; EMPTY never beats another tag."""
    return _propagate(tree.root)


def resolve_value(path, call_pos: int, register: str, ctx: ProcContext) -> Value:
    """Slice, re-optimize and propagate in one step."""
    tree = reoptimize_slice(slice_register(path, call_pos, register, ctx))
    return assign_and_propagate(tree, ctx)
