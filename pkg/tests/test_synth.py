from bincall.parser import parse_listing
from bincall.reprbuild import analyze_procedure
from bincall.synth import generate_synthetic_corpus


def test_determinism():
    assert generate_synthetic_corpus(41, 30) == generate_synthetic_corpus(41, 30)


def test_seed_sensitivity():
    assert generate_synthetic_corpus(1, 30) != generate_synthetic_corpus(2, 30)


def test_package_partitioning():
    packages = generate_synthetic_corpus(5, 25, package_size=10)
    assert [name for name, _ in packages] == ["pkg_000", "pkg_001", "pkg_002"]
    counts = [text.count(".proc ") for _, text in packages]
    assert counts == [10, 10, 5]


def test_corpus_parses_and_analyzes():
    for _, text in generate_synthetic_corpus(9, 20):
        program = parse_listing(text)
        for proc in program.procedures:
            result = analyze_procedure(proc, program)
            assert not result.flags["sink_unreachable"]
            assert result.flags["unreachable_blocks"] == 0


def test_name_vocabulary_is_rich():
    tokens = set()
    for _, text in generate_synthetic_corpus(3, 200):
        program = parse_listing(text)
        for proc in program.procedures:
            tokens.update(proc.name.split("_"))
    assert len(tokens) >= 20


def test_names_depend_on_values():
    # the corpus must contain procedures distinguished only by constants
    names = set()
    for _, text in generate_synthetic_corpus(17, 120):
        for line in text.splitlines():
            if line.startswith(".proc "):
                names.add(line.split()[1])
    stems = {n.rstrip("_0123456789") for n in names}
    assert {"kill_process", "stop_process"} & stems or {
        "print_usage",
        "print_help",
    } & stems
