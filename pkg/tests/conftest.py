import random
from contextlib import contextmanager
from pathlib import Path

import pytest

from tokevolve import Tokenizer, TrainConfig, merge_tokenizers, train
from tokevolve.corpus import read_corpus

FIXTURES = Path(__file__).parent / "fixtures"
_criteria: list[tuple[str, str, str]] = []


def load_docs(name):
    return [text for _, text in read_corpus(FIXTURES / name)]


@pytest.fixture(scope="session")
def corpus_a():
    return load_docs("corpus_a.jsonl")


@pytest.fixture(scope="session")
def corpus_b():
    return load_docs("corpus_b.jsonl")


@pytest.fixture(scope="session")
def t_old(corpus_a):
    return train(corpus_a, TrainConfig(500))


@pytest.fixture(scope="session")
def t_new(corpus_a, corpus_b):
    return train(corpus_a + corpus_b, TrainConfig(600))


@pytest.fixture(scope="session")
def outcome(t_old, t_new):
    return merge_tokenizers(t_old, t_new)


@pytest.fixture(scope="session")
def coron_pair():
    """Old tokenizer knows Cor and on; the new one composes them into Coron and Corona."""
    base = [("C", "o"), ("Co", "r"), ("o", "n"), ("Ġ", "c"), ("Ġc", "o"), ("r", "o"), ("Ġco", "ro")]
    old = Tokenizer.from_merges(base)
    new = Tokenizer.from_merges(base + [("Cor", "on"), ("Coron", "a"), ("n", "a"), ("Ġcoro", "na")])
    return old, new


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def criterion():
    @contextmanager
    def check(number, title):
        try:
            yield
        except BaseException:
            _criteria.append((str(number), title, "FAIL"))
            print(f"AC{number} FAIL  {title}")
            raise
        _criteria.append((str(number), title, "PASS"))
        print(f"AC{number} PASS  {title}")

    return check


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status in sorted(_criteria, key=lambda c: int(c[0])):
        terminalreporter.write_line(f"AC{number:<3} {status}  {title}")
