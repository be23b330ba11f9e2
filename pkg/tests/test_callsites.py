import pytest

from bincall.callsites import (
    LIBRARY_DEBUG,
    NO_LIBRARY_DEBUG,
    UNKNOWN_INDIRECT,
    UNKNOWN_INTERNAL,
    classify_target,
    infer_arity,
    reconstruct_callsite,
    resolve_arity,
)
from bincall.cfg import build_cfg, enumerate_paths
from bincall.parser import parse_listing


def single_path(text, proc_index=0):
    program = parse_listing(text)
    proc = program.procedures[proc_index]
    paths = enumerate_paths(build_cfg(proc)).paths
    assert len(paths) == 1
    return program, paths[0]


def call_positions(path):
    return [i for i, inst in enumerate(path.instructions) if inst.is_call]


HELPER = ".proc helper args=1\n.bb entry\n  mov rax, rdi\n  ret\n.endproc\n"


def test_classify_external_internal():
    program, path = single_path(
        ".import open 3\n"
        + HELPER
        + ".proc p\n.bb entry\n  call open\n  call helper\n  ret\n.endproc\n",
        proc_index=1,
    )
    ext, internal = call_positions(path)
    t1 = classify_target(path.instructions[ext], program, path, ext)
    assert (t1.kind, t1.name) == ("external", "open")
    t2 = classify_target(path.instructions[internal], program, path, internal)
    assert (t2.kind, t2.label) == ("internal", "helper")


def test_indirect_register_resolves_through_mov_chain():
    program, path = single_path(
        HELPER
        + ".proc p\n.bb entry\n  mov rcx, helper\n  mov rdx, rcx\n  call rdx\n  ret\n.endproc\n",
        proc_index=1,
    )
    pos = call_positions(path)[0]
    target = classify_target(path.instructions[pos], program, path, pos)
    assert (target.kind, target.label) == ("internal", "helper")


def test_indirect_register_unresolved_when_clobbered():
    program, path = single_path(
        HELPER
        + ".proc p\n.bb entry\n  mov rcx, helper\n  mov rcx, 5\n  call rcx\n  ret\n.endproc\n",
        proc_index=1,
    )
    pos = call_positions(path)[0]
    target = classify_target(path.instructions[pos], program, path, pos)
    assert target.kind == "indirect"
    assert target.register == "rcx"


def test_infer_arity_longest_abi_prefix():
    _, path = single_path(
        ".import f ?\n.proc p\n.bb entry\n"
        "  mov rdi, 1\n  mov rsi, 2\n  mov rdx, 3\n  call f\n  ret\n.endproc\n"
    )
    assert infer_arity(path, call_positions(path)[0]) == 3


def test_infer_arity_gap_breaks_prefix():
    _, path = single_path(
        ".import f ?\n.proc p\n.bb entry\n"
        "  mov rdi, 1\n  mov rdx, 3\n  call f\n  ret\n.endproc\n"
    )
    # rsi never written: prefix stops after rdi
    assert infer_arity(path, call_positions(path)[0]) == 1


def test_intervening_call_clobbers_argument_registers():
    _, path = single_path(
        ".import f ?\n.import g ?\n.proc p\n.bb entry\n"
        "  mov rdi, 1\n  mov rsi, 2\n  call f\n  mov rdi, 4\n  call g\n  ret\n.endproc\n"
    )
    assert infer_arity(path, call_positions(path)[1]) == 1


def test_declared_arity_in_library_debug_only():
    program, path = single_path(
        ".import write 3\n.proc p\n.bb entry\n"
        "  mov rdi, 1\n  call write\n  ret\n.endproc\n"
    )
    pos = call_positions(path)[0]
    target = classify_target(path.instructions[pos], program, path, pos)
    assert resolve_arity(target, program, path, pos, LIBRARY_DEBUG) == (3, False)
    assert resolve_arity(target, program, path, pos, NO_LIBRARY_DEBUG) == (1, False)


def test_reconstruct_display_names():
    program, path = single_path(
        ".import open 3\n.proc p\n.bb entry\n  call open\n  ret\n.endproc\n"
    )
    pos = call_positions(path)[0]
    target = classify_target(path.instructions[pos], program, path, pos)
    proto = reconstruct_callsite(target, 3)
    assert proto.display_name == "open"
    assert proto.arg_registers == ("rdi", "rsi", "rdx")
    assert proto.return_register == "rax"


def test_unknown_markers():
    from bincall.callsites import CallTarget

    assert reconstruct_callsite(CallTarget(kind="internal", label="x"), 1).display_name == UNKNOWN_INTERNAL
    assert reconstruct_callsite(CallTarget(kind="indirect", register="rcx"), 0).display_name == UNKNOWN_INDIRECT


def test_arity_above_six_rejected():
    from bincall.callsites import CallTarget

    with pytest.raises(ValueError):
        reconstruct_callsite(CallTarget(kind="external", name="f"), 7)
