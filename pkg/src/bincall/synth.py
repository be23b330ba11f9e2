"""Seeded synthetic NAL corpus generator.

Template-driven procedures over file/network/string/process APIs. Each
procedure's name is a deterministic function of the API calls it makes and
of the constant arguments it passes, so names are learnable from the
emitted representation (and partly *only* from the values). Instances are
perturbed with scratch-register renaming, block reordering and dead-code
insertion so listing order diverges from control-flow order.

Every declared argument register is written immediately before its call,
which keeps caller-side arity inference in agreement with the declared
arities (and therefore keeps analysis results stable under obfuscation).
"""

from __future__ import annotations

import random

API_ARITIES = {
    "open": 3, "read": 3, "write": 3, "close": 1, "unlink": 1, "rename": 2,
    "socket": 3, "connect": 3, "bind": 3, "listen": 2, "setsockopt": 5,
    "send": 4, "recv": 4,
    "memset": 3, "sprintf": 2, "printf": 1, "perror": 1,
    "malloc": 1, "free": 1,
    "fork": 0, "execv": 2, "waitpid": 3, "kill": 2, "signal": 2,
}

_STRINGS = {
    "path_data": "/var/lib/app/data.bin",
    "path_conf": "/etc/app.conf",
    "path_tmp": "/tmp/app.XXXXXX",
    "path_bin": "/usr/bin/worker",
    "msg_usage": "usage: app [options] file",
    "msg_help": "help: see the manual",
    "msg_version": "version 1.4.2",
    "msg_error": "error: operation failed",
    "fmt_pair": "%s=%s",
}

_SCRATCH_CHOICES = ("rax", "r10", "r11")
_DEAD_REGS = ("r12", "r13", "r14", "r15")

ARG_REGS = ("rdi", "rsi", "rdx", "rcx", "r8", "r9")


class _Proc:
    def __init__(self, name, arg_count, rng):
        self.name = name
        self.arg_count = arg_count
        self.rng = rng
        self.blocks = []  # (label, [lines])
        self.used_apis = set()
        self.used_strings = set()
        self.scratch = rng.choice(_SCRATCH_CHOICES)
        self.arg_slot = 0x50 + 8 * rng.randrange(4)
        self.ret_slot = self.arg_slot + 8
        self.buf_slot = 0x90 + 8 * rng.randrange(4)
        self._label_n = 0

    def new_label(self, stem):
        self._label_n += 1
        return f"{stem}{self._label_n}"

    def block(self, label, pinned=False):
        lines = []
        self.blocks.append((label, lines, pinned))
        return lines

    def branch(self, lines, jcc, target, else_target):
        # end the block at the conditional jump; its fallthrough must be the
        # next listed block, so pin a jmp trampoline right behind it
        lines.append(f"{jcc} {target}")
        trampoline = self.block(self.new_label("ft"), pinned=True)
        trampoline.append(f"jmp {else_target}")

    def dead_code(self, lines):
        reg = self.rng.choice(_DEAD_REGS)
        k = self.rng.randrange(1, 64)
        lines.append(f"mov {reg}, {k}")
        if self.rng.random() < 0.5:
            lines.append(f"add {reg}, {self.rng.randrange(1, 16)}")

    def load_const(self, lines, reg, value):
        style = self.rng.random()
        if value == 0 and style < 0.6:
            lines.append(f"xor {reg}, {reg}")
        elif value == 1 and style < 0.4:
            lines.append(f"xor {reg}, {reg}")
            lines.append(f"inc {reg}")
        elif style < 0.2 and value > 3:
            delta = self.rng.randrange(1, min(value, 32))
            lines.append(f"mov {reg}, {value - delta}")
            lines.append(f"add {reg}, {delta}")
        else:
            lines.append(f"mov {reg}, {value}")

    def emit_call(self, lines, api, args, internal=False, indirect=False):
        if not internal:
            self.used_apis.add(api)
        if self.rng.random() < 0.3:
            self.dead_code(lines)
        scr = self.scratch
        for i, arg in enumerate(args):
            reg = ARG_REGS[i]
            if isinstance(arg, int):
                self.load_const(lines, reg, arg)
            elif arg == "arg":
                lines.append(f"mov {scr}, [rbp - 0x{self.arg_slot:x}]")
                lines.append(f"mov {reg}, {scr}")
            elif arg == "ret":
                lines.append(f"mov {scr}, [rbp - 0x{self.ret_slot:x}]")
                lines.append(f"mov {reg}, {scr}")
            elif arg == "preset":
                pass  # register already holds the value (path-divergent args)
            elif arg == "stk":
                lines.append(f"lea {reg}, [rbp - 0x{self.buf_slot:x}]")
            elif isinstance(arg, tuple) and arg[0] == "str":
                self.used_strings.add(arg[1])
                lines.append(f"mov {reg}, str:{arg[1]}")
            else:
                raise ValueError(f"bad arg spec {arg!r}")
        if indirect:
            lines.append(f"mov r11, {api}")
            lines.append("call r11")
        else:
            lines.append(f"call {api}")

    def save_ret(self, lines):
        lines.append(f"mov [rbp - 0x{self.ret_slot:x}], rax")

    def save_arg(self, lines):
        lines.append(f"mov [rbp - 0x{self.arg_slot:x}], rdi")

    def render(self):
        # shuffle units of (block + its pinned fallthrough blocks); the unit
        # holding the entry block stays first
        units = []
        for label, lines, pinned in self.blocks:
            if pinned and units:
                units[-1].append((label, lines))
            else:
                units.append([(label, lines)])
        entry, rest = units[0], units[1:]
        self.rng.shuffle(rest)
        out = [f".proc {self.name} args={self.arg_count}"]
        for unit in [entry] + rest:
            for label, lines in unit:
                out.append(f".bb {label}")
                out.extend(f"  {line}" for line in lines)
        out.append(".endproc")
        return out


def _fail_block(proc, label, message_key):
    lines = proc.block(label)
    proc.emit_call(lines, "perror", [("str", message_key)])
    lines.append("ret")


def _template_file_io(proc, rng):
    flag = rng.choice([0, 1, 1089])
    verb, io_api = {0: ("read", "read"), 1: ("write", "write"), 1089: ("append", "write")}[flag]
    path = rng.choice(["path_data", "path_conf", "path_tmp"])
    size = rng.choice([64, 128, 256, 512])
    fail = proc.new_label("fail")
    body = proc.new_label("body")

    lines = proc.block("entry")
    proc.save_arg(lines)
    proc.emit_call(lines, "open", [("str", path), flag, 438])
    proc.save_ret(lines)
    lines.append("cmp rax, 0")
    proc.branch(lines, "jl", fail, body)

    lines = proc.block(body)
    proc.emit_call(lines, io_api, ["ret", "stk", size])
    proc.emit_call(lines, "close", ["ret"])
    lines.append("ret")

    _fail_block(proc, fail, "msg_error")
    return [verb, "file"]


def _template_file_remove(proc, rng):
    if rng.random() < 0.5:
        lines = proc.block("entry")
        proc.emit_call(lines, "unlink", ["arg"])
        lines.append("ret")
        return ["remove", "file"]
    lines = proc.block("entry")
    proc.emit_call(lines, "rename", ["arg", ("str", "path_tmp")])
    lines.append("ret")
    return ["rename", "file"]


def _template_net_client(proc, rng):
    sock_type = rng.choice([1, 2])
    type_token = {1: "tcp", 2: "udp"}[sock_type]
    fail = proc.new_label("fail")
    conn = proc.new_label("conn")

    lines = proc.block("entry")
    proc.save_arg(lines)
    proc.emit_call(lines, "socket", [2, sock_type, 0])
    proc.save_ret(lines)
    lines.append("cmp rax, 0")
    proc.branch(lines, "jl", fail, conn)

    lines = proc.block(conn)
    proc.emit_call(lines, "connect", ["ret", "arg", 16])
    lines.append("ret")

    _fail_block(proc, fail, "msg_error")
    return ["connect", type_token, "socket"]


def _template_net_server(proc, rng):
    sock_type = rng.choice([1, 2])
    type_token = {1: "tcp", 2: "udp"}[sock_type]
    backlog = rng.choice([8, 16, 32])
    fail = proc.new_label("fail")
    lst = proc.new_label("listen")

    lines = proc.block("entry")
    proc.emit_call(lines, "socket", [2, sock_type, 0])
    proc.save_ret(lines)
    lines.append("cmp rax, 0")
    proc.branch(lines, "jl", fail, lst)

    lines = proc.block(lst)
    proc.emit_call(lines, "bind", ["ret", "stk", 16])
    proc.emit_call(lines, "listen", ["ret", backlog])
    lines.append("ret")

    _fail_block(proc, fail, "msg_error")
    return ["create", type_token, "server"]


def _template_net_toggle(proc, rng):
    on = proc.new_label("on")
    conf = proc.new_label("conf")

    lines = proc.block("entry")
    proc.emit_call(lines, "socket", [2, 1, 0])
    proc.save_ret(lines)
    lines.append("mov rsi, 0")
    lines.append("cmp rax, 0")
    proc.branch(lines, "jz", on, conf)

    lines = proc.block(on)
    lines.append("mov rsi, 1")
    lines.append(f"jmp {conf}")

    lines = proc.block(conf)
    # rsi diverges per path; move it into the third slot before the others load
    lines.append("mov rdx, rsi")
    proc.emit_call(lines, "setsockopt", ["ret", 1, "preset", "stk", 4])
    lines.append("ret")
    return ["configure", "socket"]


def _template_print_msg(proc, rng):
    key = rng.choice(["msg_usage", "msg_help", "msg_version", "msg_error"])
    token = key.split("_")[1]
    lines = proc.block("entry")
    if rng.random() < 0.5:
        proc.emit_call(lines, "memset", ["stk", 0, 64])
    proc.emit_call(lines, "printf", [("str", key)])
    lines.append("ret")
    return ["print", token]


def _template_format_pair(proc, rng):
    lines = proc.block("entry")
    proc.emit_call(lines, "memset", ["stk", 0, 128])
    proc.emit_call(lines, "sprintf", ["stk", ("str", "fmt_pair")])
    proc.emit_call(lines, "printf", ["stk"])
    lines.append("ret")
    return ["format", "pair"]


def _template_kill(proc, rng):
    sig = rng.choice([1, 9, 15])
    verb = {1: "hangup", 9: "kill", 15: "stop"}[sig]
    lines = proc.block("entry")
    proc.save_arg(lines)
    proc.emit_call(lines, "kill", ["arg", sig])
    lines.append("ret")
    return [verb, "process"]


def _template_alloc(proc, rng):
    size = rng.choice([32, 64, 4096, 8192])
    size_token = "small" if size <= 64 else "large"
    fail = proc.new_label("fail")
    fill = proc.new_label("fill")

    lines = proc.block("entry")
    proc.emit_call(lines, "malloc", [size])
    proc.save_ret(lines)
    lines.append("cmp rax, 0")
    proc.branch(lines, "jz", fail, fill)

    lines = proc.block(fill)
    proc.emit_call(lines, "memset", ["ret", 0, size])
    lines.append("ret")

    _fail_block(proc, fail, "msg_error")
    return ["alloc", size_token, "buffer"]


def _template_exec(proc, rng):
    wait_flags = rng.choice([0, 1])
    verb = {0: "run", 1: "spawn"}[wait_flags]
    lines = proc.block("entry")
    proc.emit_call(lines, "fork", [])
    proc.save_ret(lines)
    proc.emit_call(lines, "execv", [("str", "path_bin"), "stk"])
    proc.emit_call(lines, "waitpid", ["ret", "stk", wait_flags])
    lines.append("ret")
    return [verb, "command"]


def _template_read_loop(proc, rng):
    size = rng.choice([256, 1024])
    loop = proc.new_label("loop")
    done = proc.new_label("done")

    lines = proc.block("entry")
    proc.save_arg(lines)
    lines.append(f"jmp {loop}")

    lines = proc.block(loop)
    proc.emit_call(lines, "read", ["arg", "stk", size])
    lines.append("cmp rax, 0")
    proc.branch(lines, "jg", loop, done)

    lines = proc.block(done)
    lines.append("ret")
    return ["drain", "stream"]


def _template_notify(proc, rng):
    # exercises internal (sometimes indirect) calls to the package helper
    indirect = rng.random() < 0.3
    lines = proc.block("entry")
    proc.save_arg(lines)
    proc.emit_call(lines, "check_status", ["arg"], internal=True, indirect=indirect)
    proc.emit_call(lines, "printf", [("str", "msg_error")])
    lines.append("ret")
    return ["notify", "status"]


_TEMPLATES = [
    _template_file_io,
    _template_file_remove,
    _template_net_client,
    _template_net_server,
    _template_net_toggle,
    _template_print_msg,
    _template_format_pair,
    _template_kill,
    _template_alloc,
    _template_exec,
    _template_read_loop,
    _template_notify,
]


def _helper_proc(rng):
    proc = _Proc("check_status", 1, rng)
    lines = proc.block("entry")
    lines.append("mov rax, rdi")
    lines.append("ret")
    return proc, ["check", "status"]


def generate_synthetic_corpus(seed: int, n: int, package_size: int = 10) -> list:
    """Returns [(package_name, nal_text)]; byte-identical for equal seeds."""
    if n < 1:
        raise ValueError("need at least one procedure")
    rng = random.Random(seed)
    packages = []
    remaining = n
    package_index = 0
    while remaining > 0:
        count = min(package_size, remaining)
        packages.append(_generate_package(f"pkg_{package_index:03d}", count, rng))
        remaining -= count
        package_index += 1
    return packages


def _generate_package(name: str, count: int, rng) -> tuple:
    procs = []
    used_apis = set()
    used_strings = set()
    seen_names = {}

    helper, _ = _helper_proc(rng)
    procs.append(helper)
    for _ in range(max(0, count - 1)):
        template = rng.choice(_TEMPLATES)
        proc = _Proc("tmp", 1, rng)
        tokens = template(proc, rng)
        base = "_".join(tokens)
        k = seen_names.get(base, 0)
        seen_names[base] = k + 1
        proc.name = base if k == 0 else f"{base}_{k + 1}"
        procs.append(proc)
        used_apis |= proc.used_apis
        used_strings |= proc.used_strings

    lines = []
    for api in sorted(used_apis):
        lines.append(f".import {api} {API_ARITIES[api]}")
    for key in sorted(used_strings):
        lines.append(f'.string {key} "{_STRINGS[key]}"')
    for proc in procs[:count]:
        lines.extend(proc.render())
    return name, "\n".join(lines) + "\n"
