from bincall_neural.data import split_by_package, value_token
from bincall_neural.vocab import NO_ARG, TAGS, UNK_VALUE, build_vocab


def test_value_token_rendering():
    assert value_token({"kind": "tag", "v": "ARG"}) == "ARG"
    assert value_token({"kind": "concrete_int", "v": 16}) == "16"
    assert value_token({"kind": "concrete_str", "v": "error: operation failed"}) == "STR:error"
    assert value_token({"kind": "concrete_str", "v": "!!!"}) == "STR:empty"


def test_corpus_merges_graphs_and_paths(small_corpus):
    assert len(small_corpus) == 40
    record = next(r for r in small_corpus if r.nodes and len(r.nodes) > 2)
    assert record.nodes[0].tokens == ["entry"]
    assert record.nodes[1].tokens == ["sink"]
    assert record.sequences  # the paths view attached


def test_vocab_structure(small_corpus):
    vocab = build_vocab(small_corpus)
    for tag in TAGS:
        assert tag in vocab.value_ids
    assert vocab.value_ids[NO_ARG] == 0
    # OOV fallbacks
    assert vocab.value_id("999999123") == vocab.value_ids[UNK_VALUE]
    assert vocab.name_id("nonexistent_token") == vocab.name_ids["<unk>"]
    assert "entry" in vocab.name_ids and "sink" in vocab.name_ids


def test_value_frequency_floor(small_corpus):
    strict = build_vocab(small_corpus, min_value_count=10**6)
    assert not any(tok.isdigit() for tok in strict.value_ids)
    loose = build_vocab(small_corpus, min_value_count=1)
    assert len(loose.value_ids) > len(strict.value_ids)


def test_split_by_package_partitions(small_corpus):
    train, valid, test = split_by_package(small_corpus, seed=5)
    assert len(train) + len(valid) + len(test) == len(small_corpus)
    sets = [
        {r.package for r in part} for part in (train, valid, test)
    ]
    assert not (sets[0] & sets[1] or sets[0] & sets[2] or sets[1] & sets[2])
