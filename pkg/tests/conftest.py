from __future__ import annotations

from pathlib import Path

import pytest

from omni_infer import surface as S
from omni_infer.oracle import POINT_DECLS

CORPUS = Path(__file__).parent / "corpus"


def corpus_files() -> list:
    return sorted(CORPUS.glob("*.oml"))


def load(name: str) -> S.Program:
    return S.parse((CORPUS / f"{name}.oml").read_text())


@pytest.fixture
def point_labels():
    return S.parse(POINT_DECLS).labels


# acceptance criteria report one line each at the end of the run
ACCEPTANCE: dict = {}


def report(key: str, ok: bool, detail: str) -> None:
    ACCEPTANCE[key] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {key}: {detail}")
