"""Subtoken micro-F1, matching the analyzer CLI's scoring rules."""

from __future__ import annotations

import re

_NON_ALPHA = re.compile(r"[^a-z]")


def normalize(tokens) -> frozenset:
    out = set()
    for token in tokens:
        cleaned = _NON_ALPHA.sub("", token.lower())
        if cleaned:
            out.add(cleaned)
    return frozenset(out)


def micro_f1(pairs) -> dict:
    """pairs: iterable of (pred_tokens, truth_tokens)."""
    tp = pred_n = true_n = 0
    for pred_tokens, truth_tokens in pairs:
        pred = normalize(pred_tokens)
        truth = normalize(truth_tokens)
        tp += len(pred & truth)
        pred_n += len(pred)
        true_n += len(truth)
    precision = tp / pred_n if pred_n else 0.0
    recall = tp / true_n if true_n else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f1": f1}
