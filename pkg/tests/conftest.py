from pathlib import Path

import pytest

from protestdur.synthetic import disjoint_corpus, planted_corpus

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def planted():
    return planted_corpus(seed=1)


@pytest.fixture(scope="session")
def disjoint():
    return disjoint_corpus(seed=2)


@pytest.fixture
def write_csv(tmp_path):
    def _write(text, name="in.csv"):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return p

    return _write


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
