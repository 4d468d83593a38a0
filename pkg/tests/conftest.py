import random
from pathlib import Path

import pytest

from siplab.crypto_group import STD, TOY
from siplab.sim_net import read_dictionary

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
DICTIONARY = ROOT / "data" / "dictionary.txt"

# (criterion number, title, passed, detail) rows collected by test_acceptance.py
ACCEPTANCE: list = []


class ScriptedRng(random.Random):
    """random.Random whose randrange returns queued values first (for pinned ephemerals)."""

    def __new__(cls, scalars, seed=0):
        return super().__new__(cls, seed)

    def __init__(self, scalars, seed=0):
        super().__init__(seed)
        self.scalars = list(scalars)

    def randrange(self, *args, **kwargs):
        if self.scalars:
            return self.scalars.pop(0)
        return super().randrange(*args, **kwargs)


@pytest.fixture(scope="session")
def dictionary():
    return read_dictionary(DICTIONARY)


@pytest.fixture(scope="session")
def toy():
    return TOY


@pytest.fixture(scope="session")
def std():
    return STD


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title} -- {detail}")
