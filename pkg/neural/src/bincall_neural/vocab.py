"""Vocabularies: API-name subtokens, argument values, output subtokens."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

NO_ARG = "<no-arg>"
UNK = "<unk>"
UNK_VALUE = "<unk-val>"
BOS = "<bos>"
EOS = "<eos>"

TAGS = ("ARG", "GLOBAL", "RET", "STK", "EMPTY")


@dataclass
class Vocab:
    name_ids: dict
    value_ids: dict
    out_ids: dict

    def name_id(self, token: str) -> int:
        return self.name_ids.get(token, self.name_ids[UNK])

    def value_id(self, token: str) -> int:
        return self.value_ids.get(token, self.value_ids[UNK_VALUE])

    def out_id(self, token: str) -> int:
        return self.out_ids.get(token, self.out_ids[UNK])

    @property
    def out_tokens(self) -> list:
        return sorted(self.out_ids, key=self.out_ids.get)


def build_vocab(records, min_value_count: int = 2) -> Vocab:
    """Concrete values below the frequency floor fall back to UNK-value."""
    names = set()
    value_counts: Counter = Counter()
    out_tokens = set()
    for record in records:
        out_tokens.update(record.name_tokens)
        for cs in list(record.nodes) + [cs for seq in record.sequences for cs in seq]:
            names.update(cs.tokens)
            value_counts.update(cs.values)

    name_list = [UNK] + sorted(names)
    value_list = [NO_ARG, UNK_VALUE] + list(TAGS) + sorted(
        token
        for token, count in value_counts.items()
        if token not in TAGS and count >= min_value_count
    )
    out_list = [UNK, BOS, EOS] + sorted(out_tokens)
    return Vocab(
        name_ids={t: i for i, t in enumerate(name_list)},
        value_ids={t: i for i, t in enumerate(value_list)},
        out_ids={t: i for i, t in enumerate(out_list)},
    )
