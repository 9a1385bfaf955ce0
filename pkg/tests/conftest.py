import shutil
from pathlib import Path

import pytest

from timebound.parser import parse_program

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
DATA = Path(__file__).resolve().parent / "data"

HAVE_Z3 = shutil.which("z3") is not None
needs_z3 = pytest.mark.skipif(not HAVE_Z3, reason="z3 binary not on PATH")


def load(name: str, mode: str | None = None):
    return parse_program((CORPUS / f"{name}.imp").read_text(), mode)


@pytest.fixture
def corpus():
    return load


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
