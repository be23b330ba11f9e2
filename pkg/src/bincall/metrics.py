"""Subtoken precision/recall/F1: case-, order- and duplication-insensitive,
ignoring non-alphabetic characters."""

from __future__ import annotations

import re
from dataclasses import dataclass

_NON_ALPHA = re.compile(r"[^a-z]")


@dataclass(frozen=True)
class ScoreCounts:
    tp: int
    pred_n: int
    true_n: int


def normalize_tokens(tokens) -> frozenset:
    out = set()
    for token in tokens:
        cleaned = _NON_ALPHA.sub("", token.lower())
        if cleaned:
            out.add(cleaned)
    return frozenset(out)


def score_pair(pred_tokens, truth_tokens) -> ScoreCounts:
    pred = normalize_tokens(pred_tokens)
    truth = normalize_tokens(truth_tokens)
    return ScoreCounts(tp=len(pred & truth), pred_n=len(pred), true_n=len(truth))


def _safe_div(a, b):
    return a / b if b else 0.0


def _prf(tp, pred_n, true_n):
    precision = _safe_div(tp, pred_n)
    recall = _safe_div(tp, true_n)
    f1 = _safe_div(2 * precision * recall, precision + recall)
    return {"precision": precision, "recall": recall, "f1": f1}


def aggregate_corpus(counts, macro: bool = False) -> dict:
    """Micro (count-sum) aggregation by default; macro averages per example."""
    counts = list(counts)
    if macro:
        if not counts:
            return {"precision": 0.0, "recall": 0.0, "f1": 0.0}
        per = [_prf(c.tp, c.pred_n, c.true_n) for c in counts]
        n = len(per)
        return {
            "precision": sum(p["precision"] for p in per) / n,
            "recall": sum(p["recall"] for p in per) / n,
            "f1": sum(p["f1"] for p in per) / n,
        }
    tp = sum(c.tp for c in counts)
    pred_n = sum(c.pred_n for c in counts)
    true_n = sum(c.true_n for c in counts)
    return _prf(tp, pred_n, true_n)
