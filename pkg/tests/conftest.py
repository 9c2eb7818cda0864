import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from morpho_hebb.alphabet import Alphabet  # noqa: E402
from morpho_hebb.corpus import normalize_text, read_text  # noqa: E402
from morpho_hebb.hierarchy import Hierarchy, TrainConfig, grow_from_text  # noqa: E402

DATA = Path(__file__).parent / "data"
PKG_DATA = Path(__file__).parent.parent / "src" / "morpho_hebb" / "data"

RUN_SENTENCE = "I run, he runs, they ran."


@pytest.fixture(scope="session")
def run_h():
    return grow_from_text(normalize_text(RUN_SENTENCE))


@pytest.fixture(scope="session")
def aba_h():
    ab = Alphabet.from_string("ab")
    return Hierarchy.from_grams(["ab", "ba", "aba"], ab)


@pytest.fixture(scope="session")
def alice_text():
    return read_text(DATA / "alice.txt")


@pytest.fixture(scope="session")
def alice_stream(alice_text):
    return normalize_text(alice_text, origin="alice")


@pytest.fixture(scope="session")
def alice_h(alice_stream):
    return grow_from_text(alice_stream, TrainConfig())


@pytest.fixture(scope="session")
def puzzle_words():
    return (PKG_DATA / "puzzle_words.txt").read_text().split()


@pytest.fixture(scope="session")
def puzzle_h(puzzle_words):
    return grow_from_text(normalize_text(" ".join(puzzle_words)))


@pytest.fixture(scope="session")
def d4_h():
    ab = Alphabet.from_string("abcd")
    text = "abcd dab cabd bca adcb bdac cdab dcb acd"
    return grow_from_text(normalize_text(text, ab), TrainConfig(max_level=6), ab)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
