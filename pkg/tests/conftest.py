import numpy as np
import pytest

from modsg.modular import make_modular_params
from modsg.model import make_model

THETAS = (np.pi / 4, np.pi / 3, 0.5)


@pytest.fixture
def p4():
    return make_modular_params(np.pi / 4)


@pytest.fixture(params=THETAS, ids=["pi/4", "pi/3", "0.5"])
def params(request):
    return make_modular_params(request.param)


def tau_for(params, t2):
    """tau giving |t^2| = t2."""
    return float(np.log(t2) / (4 * np.pi * params.eta))


@pytest.fixture
def n1_spec(p4):
    return make_model(p4, [0.15], [-0.15], tau=-0.4)


@pytest.fixture
def n2_sym(p4):
    return make_model(p4, [0.2, -0.2], tau=-0.5)


# acceptance reporting: one PASS/FAIL line per criterion, echoed in the summary

_ACCEPTANCE_LINES = []


class Criterion:
    def __init__(self, number, title):
        self.number, self.title = number, title
        self.details = []
        self.ok = True
        self.finished = False

    def check(self, ok, detail):
        ok = bool(ok)
        self.ok = self.ok and ok
        self.details.append(detail if ok else f"{detail} (violated)")
        return ok

    def finish(self):
        self.finished = True
        assert self.ok, "; ".join(self.details)


@pytest.fixture
def criterion():
    made = []

    def make(number, title):
        c = Criterion(number, title)
        made.append(c)
        return c

    yield make
    for c in made:
        status = "PASS" if c.ok and c.finished else "FAIL"
        detail = "; ".join(c.details) if c.finished else "aborted by an exception"
        line = f"criterion {c.number} [{status}] {c.title}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
