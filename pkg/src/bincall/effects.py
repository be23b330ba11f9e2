"""Per-instruction dataflow effect sets.

Four sets per instruction: values read (registers, immediates, string
refs), registers written, memory addresses read, memory addresses written.
Registers appearing inside an address expression go to the value-read set;
the expression itself goes to the pointer sets. Control flow contributes no
stack or instruction-pointer effects. ``call`` writes the return register.
"""

from __future__ import annotations

from dataclasses import dataclass

from .isa import (
    Imm,
    Instruction,
    Label,
    Mem,
    MemExpr,
    Reg,
    RETURN_REGISTER,
    StrRef,
    CONDITIONAL_JUMPS,
    KNOWN_MNEMONICS,
)


@dataclass(frozen=True)
class StackSlot:
    """Symbolic stack slot for push/pop, keyed by path-local stack depth."""

    depth: int


@dataclass(frozen=True)
class EffectSets:
    v_read: frozenset = frozenset()
    v_write: frozenset = frozenset()
    p_read: frozenset = frozenset()
    p_write: frozenset = frozenset()


_RMW_BINARY = frozenset({"add", "sub", "xor", "and", "or", "shl", "shr", "imul"})
_RMW_UNARY = frozenset({"inc", "dec", "neg"})


def _value_of(op):
    if isinstance(op, Reg):
        return op.name
    if isinstance(op, Imm):
        return op.value
    if isinstance(op, StrRef):
        return op
    if isinstance(op, Label):
        return op
    return None


def _read_source(op, v_read, p_read):
    if isinstance(op, Mem):
        p_read.add(op.expr)
        v_read.update(op.expr.registers())
    else:
        value = _value_of(op)
        if value is not None:
            v_read.add(value)


def effect_sets(inst: Instruction, stack_depth: int = 0) -> EffectSets:
    """Effect sets for one instruction.

    ``stack_depth`` keys the symbolic slot used by push/pop; path analyses
    pass the running depth, standalone callers can leave the default.
    """
    v_read: set = set()
    v_write: set = set()
    p_read: set = set()
    p_write: set = set()
    m = inst.mnemonic
    ops = inst.operands

    if m == "nop" or m == "ret" or m == "jmp" or m in CONDITIONAL_JUMPS:
        # indirect jumps read nothing here: control flow effects are excluded
        pass
    elif m == "mov" and len(ops) == 2:
        dst, src = ops
        _read_source(src, v_read, p_read)
        if isinstance(dst, Reg):
            v_write.add(dst.name)
        elif isinstance(dst, Mem):
            p_write.add(dst.expr)
            v_read.update(dst.expr.registers())
    elif m == "lea" and len(ops) == 2:
        dst, src = ops
        if isinstance(src, Mem):
            v_read.update(src.expr.registers())  # address computed, not dereferenced
        else:
            value = _value_of(src)
            if value is not None:
                v_read.add(value)
        if isinstance(dst, Reg):
            v_write.add(dst.name)
    elif m in _RMW_BINARY and len(ops) == 2:
        dst, src = ops
        _read_source(src, v_read, p_read)
        if isinstance(dst, Reg):
            v_read.add(dst.name)
            v_write.add(dst.name)
        elif isinstance(dst, Mem):
            p_read.add(dst.expr)
            p_write.add(dst.expr)
            v_read.update(dst.expr.registers())
    elif m in _RMW_UNARY and len(ops) == 1:
        (dst,) = ops
        if isinstance(dst, Reg):
            v_read.add(dst.name)
            v_write.add(dst.name)
        elif isinstance(dst, Mem):
            p_read.add(dst.expr)
            p_write.add(dst.expr)
            v_read.update(dst.expr.registers())
    elif m in ("cmp", "test") and len(ops) == 2:
        for op in ops:
            _read_source(op, v_read, p_read)
    elif m == "push" and len(ops) == 1:
        _read_source(ops[0], v_read, p_read)
        p_write.add(StackSlot(stack_depth))
    elif m == "pop" and len(ops) == 1:
        (dst,) = ops
        p_read.add(StackSlot(stack_depth - 1))
        if isinstance(dst, Reg):
            v_write.add(dst.name)
    elif m == "call" and len(ops) == 1:
        target = ops[0]
        v_write.add(RETURN_REGISTER)
        if isinstance(target, Reg):
            v_read.add(target.name)
            p_read.add(MemExpr(base=target.name))
        elif isinstance(target, Mem):
            p_read.add(target.expr)
            v_read.update(target.expr.registers())
        # direct call targets carry no dataflow
    elif m in KNOWN_MNEMONICS:
        # a known mnemonic with an unexpected operand shape
        _fallback(ops, v_read, v_write)
    else:
        _fallback(ops, v_read, v_write)

    return EffectSets(
        v_read=frozenset(v_read),
        v_write=frozenset(v_write),
        p_read=frozenset(p_read),
        p_write=frozenset(p_write),
    )


def _fallback(ops, v_read, v_write):
    # conservative: read every operand register, write the first if a register
    for op in ops:
        if isinstance(op, Reg):
            v_read.add(op.name)
        elif isinstance(op, Mem):
            v_read.update(op.expr.registers())
    if ops and isinstance(ops[0], Reg):
        v_write.add(ops[0].name)
