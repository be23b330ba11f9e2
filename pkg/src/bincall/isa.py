"""Core data model for the normalized assembly listing (NAL) input.

Registers are always stored by their 64-bit family name; sub-register
spellings (eax, ax, al, r8d, ...) are folded away at parse time because the
same value flows through them interchangeably.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

GPR_FAMILIES = (
    "rax", "rbx", "rcx", "rdx", "rsi", "rdi", "rbp", "rsp",
    "r8", "r9", "r10", "r11", "r12", "r13", "r14", "r15",
)

ABI_ARG_REGISTERS = ("rdi", "rsi", "rdx", "rcx", "r8", "r9")
RETURN_REGISTER = "rax"


def _build_alias_table() -> dict:
    table = {}
    legacy = {
        "rax": ("eax", "ax", "al", "ah"),
        "rbx": ("ebx", "bx", "bl", "bh"),
        "rcx": ("ecx", "cx", "cl", "ch"),
        "rdx": ("edx", "dx", "dl", "dh"),
        "rsi": ("esi", "si", "sil"),
        "rdi": ("edi", "di", "dil"),
        "rbp": ("ebp", "bp", "bpl"),
        "rsp": ("esp", "sp", "spl"),
    }
    for family in GPR_FAMILIES:
        table[family] = family
    for family, aliases in legacy.items():
        for alias in aliases:
            table[alias] = family
    for n in range(8, 16):
        for suffix in ("d", "w", "b"):
            table[f"r{n}{suffix}"] = f"r{n}"
    return table


_REGISTER_ALIASES = _build_alias_table()


class UnknownRegisterError(ValueError):
    pass


def canonicalize_register(name: str) -> str:
    """Map any x86-64 GPR spelling to its 64-bit family name."""
    try:
        return _REGISTER_ALIASES[name.lower()]
    except KeyError:
        raise UnknownRegisterError(f"unknown register name: {name!r}") from None


def is_register_token(name: str) -> bool:
    return name.lower() in _REGISTER_ALIASES


@dataclass(frozen=True)
class Reg:
    name: str  # canonical family name


@dataclass(frozen=True)
class Imm:
    value: int  # signed 64-bit


@dataclass(frozen=True)
class MemExpr:
    """[base + index*scale + disp], all registers canonical."""

    base: Optional[str] = None
    index: Optional[str] = None
    scale: int = 1
    disp: int = 0

    def __post_init__(self):
        if self.base is None and self.index is None and self.disp == 0:
            raise ValueError("memory expression needs a base, index or displacement")
        if self.index is None and self.scale != 1:
            raise ValueError("scale requires an index register")
        if self.scale not in (1, 2, 4, 8):
            raise ValueError(f"invalid scale {self.scale}")

    def registers(self) -> tuple:
        regs = []
        if self.base is not None:
            regs.append(self.base)
        if self.index is not None and self.index != self.base:
            regs.append(self.index)
        return tuple(regs)


@dataclass(frozen=True)
class Mem:
    expr: MemExpr


@dataclass(frozen=True)
class Label:
    name: str


@dataclass(frozen=True)
class StrRef:
    ident: str


Operand = Union[Reg, Imm, Mem, Label, StrRef]

CONDITIONAL_JUMPS = frozenset(
    {"jz", "jnz", "jl", "jle", "jg", "jge", "jb", "jbe", "ja", "jae"}
)
TERMINATORS = frozenset({"ret", "jmp"}) | CONDITIONAL_JUMPS

KNOWN_MNEMONICS = frozenset(
    {
        "mov", "lea", "add", "sub", "inc", "dec", "neg", "xor", "and", "or",
        "shl", "shr", "imul", "cmp", "test", "push", "pop", "call", "ret",
        "jmp", "nop",
    }
) | CONDITIONAL_JUMPS


@dataclass(frozen=True)
class Instruction:
    seq_index: int
    mnemonic: str
    operands: tuple = ()

    @property
    def is_call(self) -> bool:
        return self.mnemonic == "call"

    @property
    def is_terminator(self) -> bool:
        return self.mnemonic in TERMINATORS


@dataclass
class BasicBlock:
    label: str
    instructions: list = field(default_factory=list)


@dataclass
class Procedure:
    name: str
    blocks: list = field(default_factory=list)
    arg_count: Optional[int] = None

    @property
    def is_anonymous(self) -> bool:
        return self.name.startswith("anon_")

    def block_index(self) -> dict:
        return {block.label: i for i, block in enumerate(self.blocks)}

    def instructions(self):
        for block in self.blocks:
            yield from block.instructions


@dataclass
class Program:
    imports: dict = field(default_factory=dict)  # name -> arity (int) or None
    strings: dict = field(default_factory=dict)  # id -> bytes content (str)
    procedures: list = field(default_factory=list)

    def procedure_names(self) -> set:
        return {proc.name for proc in self.procedures}


def format_operand(op: Operand) -> str:
    if isinstance(op, Reg):
        return op.name
    if isinstance(op, Imm):
        return str(op.value)
    if isinstance(op, Label):
        return op.name
    if isinstance(op, StrRef):
        return f"str:{op.ident}"
    if isinstance(op, Mem):
        e = op.expr
        parts = []
        if e.base is not None:
            parts.append(e.base)
        if e.index is not None:
            parts.append(f"{e.index}*{e.scale}" if e.scale != 1 else e.index)
        if e.disp != 0 or not parts:
            if parts and e.disp >= 0:
                parts.append(f"+ {e.disp}")
            elif parts:
                parts.append(f"- {-e.disp}")
            else:
                parts.append(str(e.disp))
        joined = " ".join(parts).replace(" + ", " + ").replace(" - ", " - ")
        return f"[{joined}]"
    raise TypeError(f"not an operand: {op!r}")


def format_instruction(inst: Instruction) -> str:
    if not inst.operands:
        return inst.mnemonic
    return f"{inst.mnemonic} " + ", ".join(format_operand(op) for op in inst.operands)
