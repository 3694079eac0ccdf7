import sys
from pathlib import Path

import pytest
from hypothesis import settings

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(Path(__file__).resolve().parent))

settings.register_profile("repo", deadline=None, derandomize=True, print_blob=True)
settings.load_profile("repo")

CORPUS = ROOT / "corpus"
GOLDEN = CORPUS / "golden"
TAXONOMY = ROOT / "taxonomy"


def corpus_files():
    return sorted(CORPUS.rglob("*.mthy"))


@pytest.fixture(scope="session")
def corpus_results():
    """Every corpus file translated with its own options."""
    from isarify.pipeline import translate_source
    return {p.relative_to(CORPUS).as_posix(): translate_source(p.read_text(encoding="utf-8"))
            for p in corpus_files()}


@pytest.fixture(scope="session")
def corpus_loaded():
    from isarify.theory import load_theory
    return {p.relative_to(CORPUS).as_posix(): load_theory(p.read_text(encoding="utf-8"))
            for p in corpus_files()}


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
