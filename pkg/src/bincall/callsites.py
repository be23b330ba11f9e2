"""Call-target classification, arity resolution and call-site prototypes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .effects import effect_sets
from .isa import ABI_ARG_REGISTERS, Instruction, Label, Mem, Program, Reg

UNKNOWN_INTERNAL = "UnknownInternal"
UNKNOWN_INDIRECT = "UnknownIndirect"

LIBRARY_DEBUG = "library-debug"
NO_LIBRARY_DEBUG = "no-library-debug"


@dataclass(frozen=True)
class CallTarget:
    kind: str  # 'internal' | 'external' | 'indirect'
    name: Optional[str] = None  # external import name
    label: Optional[str] = None  # internal procedure name
    register: Optional[str] = None  # indirect target register
    unresolved_memory: bool = False


@dataclass(frozen=True)
class CallSiteProto:
    display_name: str
    arity: int
    arg_registers: tuple
    unknown_arity: bool = False
    return_register: str = "rax"


def _classify_label(name: str, program: Program) -> CallTarget:
    if name in program.imports:
        return CallTarget(kind="external", name=name)
    if name in program.procedure_names():
        return CallTarget(kind="internal", label=name)
    # parser guarantees this does not happen for well-formed listings
    return CallTarget(kind="indirect", unresolved_memory=True)


def _resolve_register_target(path, call_pos: int, register: str):
    """Constant-propagate label values through mov chains on the path prefix."""
    bindings = {}
    for inst in path.instructions[:call_pos]:
        written = effect_sets(inst).v_write
        if inst.mnemonic == "mov" and len(inst.operands) == 2:
            dst, src = inst.operands
            if isinstance(dst, Reg):
                if isinstance(src, Label):
                    bindings[dst.name] = src.name
                    continue
                if isinstance(src, Reg) and src.name in bindings:
                    bindings[dst.name] = bindings[src.name]
                    continue
        for reg in written:
            bindings.pop(reg, None)
    return bindings.get(register)


def classify_target(call: Instruction, program: Program, path=None, call_pos=None) -> CallTarget:
    if not call.is_call:
        raise ValueError("classify_target expects a call instruction")
    target = call.operands[0] if call.operands else None
    if isinstance(target, Label):
        return _classify_label(target.name, program)
    if isinstance(target, Reg):
        if path is not None and call_pos is not None:
            resolved = _resolve_register_target(path, call_pos, target.name)
            if resolved is not None:
                return _classify_label(resolved, program)
        return CallTarget(kind="indirect", register=target.name)
    if isinstance(target, Mem):
        return CallTarget(kind="indirect", unresolved_memory=True)
    raise ValueError(f"bad call target operand: {target!r}")


def infer_arity(path, call_pos: int) -> int:
    """Longest ABI-register prefix with a write reaching the call.

    A call between the write and the consuming call clobbers the register
    (argument registers are caller-saved).
    """
    last_write = {}
    last_call = -1
    for i, inst in enumerate(path.instructions[:call_pos]):
        for reg in effect_sets(inst).v_write:
            last_write[reg] = i
        if inst.is_call:
            last_call = i
    arity = 0
    for reg in ABI_ARG_REGISTERS:
        j = last_write.get(reg)
        if j is None or j < last_call:
            break
        arity += 1
    return arity


def resolve_arity(
    target: CallTarget,
    program: Program,
    path,
    call_pos: int,
    mode: str = LIBRARY_DEBUG,
) -> tuple:
    """Returns (arity, unknown_arity_flag)."""
    if mode not in (LIBRARY_DEBUG, NO_LIBRARY_DEBUG):
        raise ValueError(f"bad mode {mode!r}")
    if target.kind == "external" and mode == LIBRARY_DEBUG:
        declared = program.imports.get(target.name)
        if declared is not None:
            return min(declared, 6), False
    inferred = infer_arity(path, call_pos)
    if target.kind == "indirect" and target.unresolved_memory and inferred == 0:
        return 0, True
    return inferred, False


def reconstruct_callsite(target: CallTarget, arity: int, unknown_arity: bool = False) -> CallSiteProto:
    if arity > 6:
        raise ValueError("arity above 6 is out of scope (register arguments only)")
    if target.kind == "external":
        name = target.name
    elif target.kind == "internal":
        name = UNKNOWN_INTERNAL
    else:
        name = UNKNOWN_INDIRECT
    return CallSiteProto(
        display_name=name,
        arity=arity,
        arg_registers=ABI_ARG_REGISTERS[:arity],
        unknown_arity=unknown_arity,
    )
