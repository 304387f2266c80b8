import subprocess
import sys
from pathlib import Path

import pytest


@pytest.fixture(scope="session")
def pipeline_artifacts(tmp_path_factory):
    """Primary-pipeline outputs consumed through the file interfaces only.

    Generates a synthetic corpus and runs the evaluation protocol (one tree
    trial) to produce folds.json, labels.csv and per-fold narratives for the
    DAPSMH and DAPSMH-vpa configurations.
    """
    root = tmp_path_factory.mktemp("pipeline")
    corpus = root / "corpus"
    subprocess.run(
        [sys.executable, "-m", "monah.cli", "synth", "--out", str(corpus),
         "--n", "200", "--seed", "1", "--mean-turns", "16", "--sd-turns", "4"],
        check=True, capture_output=True,
    )
    subprocess.run(
        [sys.executable, "-m", "monah.cli", "evaluate", "--corpus", str(corpus),
         "--configs", "DAPSMH", "--trials", "1", "--seed", "7",
         "--fine", "vpa", "--out", str(root / "out")],
        check=True, capture_output=True,
    )
    return root / "out"


@pytest.fixture(scope="session")
def coarse_embeddings(pipeline_artifacts, tmp_path_factory):
    from han.data import vocabulary_of
    from han.vocab import build_embedding_file, load_embeddings

    path = tmp_path_factory.mktemp("emb") / "coarse.txt"
    build_embedding_file(
        vocabulary_of(pipeline_artifacts / "narratives" / "DAPSMH"), path, seed=0
    )
    return load_embeddings(path)


@pytest.fixture(scope="session")
def fine_embeddings(pipeline_artifacts, tmp_path_factory):
    from han.data import vocabulary_of
    from han.vocab import build_embedding_file, load_embeddings

    path = tmp_path_factory.mktemp("emb") / "fine.txt"
    build_embedding_file(
        vocabulary_of(pipeline_artifacts / "narratives" / "DAPSMH-vpa"), path, seed=0
    )
    return load_embeddings(path)
