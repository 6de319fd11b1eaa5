import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from chesscoach.calibration import calibrate  # noqa: E402
from chesscoach.study import StudyConfig, StudyRunner, load_corpus  # noqa: E402

CORPUS_PATH = os.path.join(os.path.dirname(__file__), "..", "corpus", "endgames.fen")

# fast search settings used across the suite; the acceptance criterion that
# pins depth 3 uses these too
FAST_STUDY = dict(hint_depth=3, opponent_depth=3)


@pytest.fixture(scope="session")
def table():
    return calibrate(schedule=(30, 60, 120), seed=7)


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(CORPUS_PATH)


@pytest.fixture()
def make_runner(table):
    def _make(corpus_boards, **kwargs):
        cfg = StudyConfig(**{**FAST_STUDY, **kwargs.pop("study", {})})
        return StudyRunner(corpus_boards, table, study_config=cfg, **kwargs)

    return _make
