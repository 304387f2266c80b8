import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
sys.path.insert(0, str(TESTS_DIR))

GOLDEN_DIR = TESTS_DIR / "golden"


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return GOLDEN_DIR


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory) -> Path:
    """A small default-signal synthetic corpus shared across tests."""
    from monah.synth import SynthConfig, synth_corpus

    root = tmp_path_factory.mktemp("corpus")
    synth_corpus(SynthConfig(n_sessions=12, mean_turns=18, sd_turns=5, seed=11), root)
    return root
