"""Training loop: Adam with per-epoch decay, teacher forcing, F1 tracking."""

from __future__ import annotations

import copy
import math
import random
from dataclasses import dataclass, field

import torch

from .metrics import micro_f1
from .model import Features, NameModel, featurize
from .vocab import Vocab, build_vocab


class TrainError(RuntimeError):
    pass


@dataclass
class Hyperparameters:
    lr: float = 1e-4
    decay: float = 0.95  # per epoch
    batch_size: int = 16
    epochs: int = 10
    d: int = 128
    dropout: float = 0.5
    seed: int = 0
    no_values: bool = False
    min_value_count: int = 2
    target_f1: float = None  # early stop once validation reaches it


def evaluate(model: NameModel, feats, records) -> dict:
    model.eval()
    pairs = [
        (model.greedy(f), r.name_tokens) for f, r in zip(feats, records)
    ]
    return micro_f1(pairs)


def predict_records(model: NameModel, vocab: Vocab, records, no_values: bool = False):
    model.eval()
    out = []
    for record in records:
        feats = featurize(record, vocab, use_values=not no_values)
        out.append({"proc_id": record.proc_id, "pred_tokens": model.greedy(feats)})
    return out


def train_model(train_records, arch: str, hp: Hyperparameters, val_records=None):
    """Returns (model, vocab, history). The best-validation weights win."""
    torch.manual_seed(hp.seed)
    labeled = [r for r in train_records if r.name_tokens]
    if not labeled:
        raise TrainError("no labeled training records")
    vocab = build_vocab(labeled, hp.min_value_count)
    use_values = not hp.no_values
    feats = [featurize(r, vocab, use_values) for r in labeled]

    val = [r for r in (val_records or labeled) if r.name_tokens]
    val_feats = (
        feats if val_records is None else [featurize(r, vocab, use_values) for r in val]
    )

    model = NameModel(vocab, arch, d=hp.d, dropout=hp.dropout)
    optimizer = torch.optim.Adam(model.parameters(), lr=hp.lr)
    scheduler = torch.optim.lr_scheduler.ExponentialLR(optimizer, gamma=hp.decay)
    order = list(range(len(feats)))
    rng = random.Random(hp.seed)

    history = []
    best_f1, best_state = -1.0, None
    for epoch in range(hp.epochs):
        model.train()
        rng.shuffle(order)
        epoch_loss = 0.0
        for start in range(0, len(order), hp.batch_size):
            batch = order[start : start + hp.batch_size]
            optimizer.zero_grad()
            loss = sum(model.loss(feats[i]) for i in batch) / len(batch)
            value = float(loss.detach())
            if not math.isfinite(value):
                raise TrainError(
                    f"non-finite loss at epoch {epoch}, batch {start // hp.batch_size} "
                    f"(arch={arch}, lr={scheduler.get_last_lr()[0]:.2e})"
                )
            loss.backward()
            optimizer.step()
            epoch_loss += value * len(batch)
        scheduler.step()

        scores = evaluate(model, val_feats, val)
        history.append(
            {
                "epoch": epoch,
                "loss": epoch_loss / len(order),
                "val_f1": scores["f1"],
                "val_precision": scores["precision"],
                "val_recall": scores["recall"],
                "lr": scheduler.get_last_lr()[0],
            }
        )
        if scores["f1"] > best_f1:
            best_f1 = scores["f1"]
            best_state = copy.deepcopy(model.state_dict())
        if hp.target_f1 is not None and scores["f1"] >= hp.target_f1:
            break

    if best_state is not None:
        model.load_state_dict(best_state)
    return model, vocab, history
