import pathlib
import subprocess

import pytest

from bincall_neural.data import load_corpus


def make_dataset(tmp_path, seed, count, extra_args=()):
    """Generate and analyze a synthetic corpus via the analyzer CLI."""
    nal_dir = tmp_path / f"nal_{seed}_{count}"
    graphs = tmp_path / f"graphs_{seed}_{count}.jsonl"
    paths = tmp_path / f"paths_{seed}_{count}.jsonl"
    subprocess.run(
        ["bincall", "synth", "--seed", str(seed), "--count", str(count), "--out", str(nal_dir)],
        check=True,
        capture_output=True,
    )
    subprocess.run(
        [
            "bincall",
            "analyze",
            "--input",
            str(nal_dir),
            "--out-graphs",
            str(graphs),
            "--out-paths",
            str(paths),
            *extra_args,
        ],
        check=True,
        capture_output=True,
    )
    return graphs, paths


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("data")
    graphs, paths = make_dataset(tmp, seed=21, count=40)
    return load_corpus(graphs, paths)
