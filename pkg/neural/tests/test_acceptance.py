"""End-to-end acceptance: overfitting capacity, value ablation gap, metric parity."""

import json
import subprocess
import time

import pytest

from bincall_neural.data import load_corpus, split_by_package
from bincall_neural.model import ARCHS, featurize
from bincall_neural.train import Hyperparameters, evaluate, predict_records, train_model

from .conftest import make_dataset

OVERFIT_BUDGET_SECONDS = 600.0


@pytest.fixture(scope="module")
def overfit_corpus(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("overfit")
    graphs, paths = make_dataset(tmp, seed=100, count=200)
    return load_corpus(graphs, paths)


@pytest.mark.parametrize("arch", ARCHS)
def test_overfit_reaches_f1_095(overfit_corpus, arch):
    # the deep transformer stack needs a gentler rate to converge stably
    lr = 1e-3 if arch == "transformer" else 3e-3
    hp = Hyperparameters(
        lr=lr, dropout=0.0, epochs=60, batch_size=16, d=128, seed=0, target_f1=0.95
    )
    start = time.monotonic()
    model, vocab, history = train_model(overfit_corpus, arch, hp)
    labeled = [r for r in overfit_corpus if r.name_tokens]
    feats = [featurize(r, vocab) for r in labeled]
    scores = evaluate(model, feats, labeled)
    elapsed = time.monotonic() - start
    assert scores["f1"] >= 0.95, (arch, scores, history[-3:])
    assert elapsed < OVERFIT_BUDGET_SECONDS, (arch, elapsed)


def test_values_beat_ablation_on_held_out(tmp_path):
    graphs, paths = make_dataset(tmp_path, seed=200, count=1000)
    records = load_corpus(graphs, paths)
    train, _valid, test = split_by_package(records, ratios=(8, 1, 1), seed=0)
    assert {r.package for r in train}.isdisjoint({r.package for r in test})

    scores = {}
    for no_values in (False, True):
        hp = Hyperparameters(
            lr=3e-3,
            dropout=0.25,
            epochs=6,
            batch_size=16,
            d=128,
            seed=0,
            no_values=no_values,
        )
        model, vocab, _ = train_model(train, "gnn", hp, val_records=test)
        feats = [
            featurize(r, vocab, use_values=not no_values)
            for r in test
            if r.name_tokens
        ]
        labeled = [r for r in test if r.name_tokens]
        scores[no_values] = evaluate(model, feats, labeled)["f1"]

    gap = scores[False] - scores[True]
    assert gap >= 0.05, scores


def test_trainer_metric_matches_score_cli(tmp_path):
    graphs, paths = make_dataset(tmp_path, seed=21, count=40)
    records = load_corpus(graphs, paths)
    hp = Hyperparameters(lr=3e-3, dropout=0.0, epochs=4, d=32, seed=0)
    model, vocab, _ = train_model(records, "lstm", hp)

    labeled = [r for r in records if r.name_tokens]
    feats = [featurize(r, vocab) for r in labeled]
    internal = evaluate(model, feats, labeled)

    pred_path = tmp_path / "pred.jsonl"
    rows = predict_records(model, vocab, labeled)
    pred_path.write_text("\n".join(json.dumps(row) for row in rows) + "\n")
    out = subprocess.run(
        ["bincall", "score", "--pred", str(pred_path), "--truth", str(graphs)],
        check=True,
        capture_output=True,
        text=True,
    )
    report = json.loads(out.stdout)
    assert report["micro"]["f1"] == pytest.approx(internal["f1"], abs=1e-9)
    assert report["micro"]["precision"] == pytest.approx(internal["precision"], abs=1e-9)
    assert report["micro"]["recall"] == pytest.approx(internal["recall"], abs=1e-9)
