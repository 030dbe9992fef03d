import functools

import pytest

from flatd2 import corpus
from flatd2.decision import classify

# Filled by test_acceptance; printed once at the end of the run.
CRITERIA: dict = {}


@functools.lru_cache(maxsize=None)
def model(name):
    return corpus.load(name)


@functools.lru_cache(maxsize=None)
def classified(name):
    return classify(model(name))


@pytest.fixture
def load():
    return model


@pytest.fixture
def cls():
    return classified


def sym(m, name):
    return {s.name: s for s in m.frame.domain.columns}[name]


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        ok, detail = CRITERIA[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
