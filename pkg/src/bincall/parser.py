"""Parser for the normalized assembly listing (NAL) format.

Line-oriented grammar:

    .import <name> <arity|?>
    .string <id> "<bytes>"
    .proc <name|anon_N> [args=<n>]
    .bb <label>
    <mnemonic> [op, op, ...]
    .endproc

'#' starts a comment (outside string literals). Memory operands use the
Intel form ``[base + index*scale + disp]``; displacements accept decimal
and 0x hex with an optional sign.
"""

from __future__ import annotations

import re

from .isa import (
    BasicBlock,
    Imm,
    Instruction,
    Label,
    Mem,
    MemExpr,
    Procedure,
    Program,
    Reg,
    StrRef,
    UnknownRegisterError,
    canonicalize_register,
    format_instruction,
    is_register_token,
)


class ParseError(ValueError):
    def __init__(self, message, line, column=1):
        super().__init__(f"line {line}, col {column}: {message}")
        self.line = line
        self.column = column


_NUMBER_RE = re.compile(r"^[+-]?(0x[0-9a-fA-F]+|\d+)$")
_NAME_RE = re.compile(r"^[A-Za-z_.$][A-Za-z0-9_.$]*$")


def _parse_number(token: str, line: int) -> int:
    if not _NUMBER_RE.match(token):
        raise ParseError(f"bad number {token!r}", line)
    return int(token, 0)


def _strip_comment(raw: str) -> str:
    out = []
    in_string = False
    for ch in raw:
        if ch == '"':
            in_string = not in_string
        if ch == "#" and not in_string:
            break
        out.append(ch)
    return "".join(out)


def _parse_mem(body: str, line: int) -> MemExpr:
    base = None
    index = None
    scale = 1
    disp = 0
    # normalize "a - b" into "+ -b" so we can split on '+'
    body = body.replace("-", "+-")
    for term in body.split("+"):
        term = term.strip()
        if not term:
            continue
        negative = term.startswith("-")
        if negative:
            term = term[1:].strip()
        if "*" in term:
            lhs, rhs = (part.strip() for part in term.split("*", 1))
            if lhs.isidentifier() and is_register_token(lhs):
                reg_tok, scale_tok = lhs, rhs
            else:
                reg_tok, scale_tok = rhs, lhs
            if negative:
                raise ParseError("negative index term", line)
            if index is not None:
                raise ParseError("multiple index registers", line)
            index = canonicalize_register(reg_tok)
            scale = _parse_number(scale_tok, line)
        elif _NUMBER_RE.match(term):
            disp += -int(term, 0) if negative else int(term, 0)
        else:
            if negative:
                raise ParseError("negative register term", line)
            if not is_register_token(term):
                raise ParseError(f"unknown register name {term!r}", line)
            reg = canonicalize_register(term)
            if base is None:
                base = reg
            elif index is None:
                index = reg
            else:
                raise ParseError("too many registers in memory expression", line)
    try:
        return MemExpr(base=base, index=index, scale=scale, disp=disp)
    except ValueError as exc:
        raise ParseError(str(exc), line) from None


def _parse_operand(token: str, line: int):
    token = token.strip()
    if not token:
        raise ParseError("empty operand", line)
    if token.startswith("["):
        if not token.endswith("]"):
            raise ParseError("unterminated memory operand", line)
        return Mem(_parse_mem(token[1:-1], line))
    if token.startswith("str:"):
        ident = token[4:]
        if not _NAME_RE.match(ident):
            raise ParseError(f"bad string reference {token!r}", line)
        return StrRef(ident)
    if _NUMBER_RE.match(token):
        return Imm(_parse_number(token, line))
    if is_register_token(token):
        return Reg(canonicalize_register(token))
    if _NAME_RE.match(token):
        return Label(token)
    raise ParseError(f"bad operand {token!r}", line)


def _parse_instruction(text: str, line: int, seq_index: int) -> Instruction:
    parts = text.split(None, 1)
    mnemonic = parts[0].lower()
    if not re.match(r"^[a-z][a-z0-9]*$", mnemonic):
        raise ParseError(f"bad mnemonic {parts[0]!r}", line)
    operands = ()
    if len(parts) > 1:
        operands = tuple(
            _parse_operand(tok, line) for tok in parts[1].split(",")
        )
    return Instruction(seq_index=seq_index, mnemonic=mnemonic, operands=operands)


def parse_listing(text: str) -> Program:
    program = Program()
    current_proc = None
    current_block = None
    seq_index = 0
    anon_counter = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = _strip_comment(raw).strip()
        if not stripped:
            continue

        if stripped.startswith(".import"):
            parts = stripped.split()
            if len(parts) != 3:
                raise ParseError(".import expects <name> <arity|?>", lineno)
            _, name, arity_tok = parts
            if not _NAME_RE.match(name):
                raise ParseError(f"bad import name {name!r}", lineno)
            arity = None if arity_tok == "?" else _parse_number(arity_tok, lineno)
            program.imports[name] = arity
        elif stripped.startswith(".string"):
            match = re.match(r'^\.string\s+(\S+)\s+"(.*)"$', stripped)
            if not match:
                raise ParseError('.string expects <id> "<bytes>"', lineno)
            program.strings[match.group(1)] = match.group(2)
        elif stripped.startswith(".proc"):
            if current_proc is not None:
                raise ParseError("nested .proc", lineno)
            parts = stripped.split()
            name = None
            arg_count = None
            for part in parts[1:]:
                if part.startswith("args="):
                    arg_count = _parse_number(part[5:], lineno)
                elif name is None:
                    name = part
                else:
                    raise ParseError(f"unexpected token {part!r}", lineno)
            if name is None:
                name = f"anon_{anon_counter}"
                anon_counter += 1
            current_proc = Procedure(name=name, arg_count=arg_count)
            current_block = None
            seq_index = 0
        elif stripped.startswith(".endproc"):
            if current_proc is None:
                raise ParseError(".endproc outside .proc", lineno)
            _validate_procedure(current_proc, program, lineno)
            program.procedures.append(current_proc)
            current_proc = None
            current_block = None
        elif stripped.startswith(".bb"):
            if current_proc is None:
                raise ParseError(".bb outside .proc", lineno)
            parts = stripped.split()
            if len(parts) != 2:
                raise ParseError(".bb expects a label", lineno)
            label = parts[1]
            if any(block.label == label for block in current_proc.blocks):
                raise ParseError(f"duplicate block label {label!r}", lineno)
            current_block = BasicBlock(label=label)
            current_proc.blocks.append(current_block)
        elif stripped.startswith("."):
            raise ParseError(f"unknown directive {stripped.split()[0]!r}", lineno)
        else:
            if current_proc is None:
                raise ParseError("instruction outside .proc", lineno)
            if current_block is None:
                current_block = BasicBlock(label="entry")
                current_proc.blocks.append(current_block)
            try:
                inst = _parse_instruction(stripped, lineno, seq_index)
            except UnknownRegisterError as exc:
                raise ParseError(str(exc), lineno) from None
            current_block.instructions.append(inst)
            seq_index += 1

    if current_proc is not None:
        raise ParseError("missing .endproc", len(text.splitlines()) or 1)
    _validate_calls(program)
    return program


def _validate_procedure(proc: Procedure, program: Program, lineno: int) -> None:
    labels = {block.label for block in proc.blocks}
    for block in proc.blocks:
        for inst in block.instructions:
            if inst.mnemonic in ("jmp",) or inst.mnemonic.startswith("j"):
                if inst.mnemonic != "jmp" and not inst.is_terminator:
                    continue
                for op in inst.operands:
                    if isinstance(op, Label) and op.name not in labels:
                        raise ParseError(
                            f"jump to undefined label {op.name!r} in {proc.name}",
                            lineno,
                        )


def _validate_calls(program: Program) -> None:
    known = set(program.imports) | program.procedure_names()
    for proc in program.procedures:
        for inst in proc.instructions():
            for op in inst.operands:
                if isinstance(op, Label) and op.name not in known:
                    block_labels = {b.label for b in proc.blocks}
                    if op.name in block_labels:
                        continue
                    raise ParseError(
                        f"reference to undefined name {op.name!r} in {proc.name}", 1
                    )


def print_listing(program: Program) -> str:
    """Render a Program back to NAL text (canonical spelling)."""
    lines = []
    for name, arity in program.imports.items():
        lines.append(f".import {name} {'?' if arity is None else arity}")
    for ident, content in program.strings.items():
        lines.append(f'.string {ident} "{content}"')
    for proc in program.procedures:
        header = f".proc {proc.name}"
        if proc.arg_count is not None:
            header += f" args={proc.arg_count}"
        lines.append(header)
        for block in proc.blocks:
            lines.append(f".bb {block.label}")
            for inst in block.instructions:
                lines.append(f"  {format_instruction(inst)}")
        lines.append(".endproc")
    return "\n".join(lines) + "\n"
