from __future__ import annotations

from pathlib import Path

import pytest

from premodtag.corpus import read_tsv

FIXTURES = Path(__file__).parent / "fixtures"
MINI = FIXTURES / "mini_corpus.tsv"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def mini_corpus():
    return read_tsv(MINI)


@pytest.fixture(scope="session")
def lexicon_paths():
    return (FIXTURES / "lemmas.txt", FIXTURES / "named_entities.txt", FIXTURES / "foreign.txt")


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    outcomes = {}
    for status in ("passed", "failed", "error", "skipped"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::" not in nodeid:
                continue
            if status == "passed" and getattr(rep, "when", "call") != "call":
                continue
            name = nodeid.split("::")[-1].split("[")[0]
            if status != "passed" or name not in outcomes:
                outcomes[name] = "PASS" if status == "passed" else "FAIL"
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(outcomes):
        terminalreporter.write_line(f"{outcomes[name]}  {name}")
