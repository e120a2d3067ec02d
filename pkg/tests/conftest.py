import numpy as np
import pytest

from hardyinterp.quadrature import build_rule


@pytest.fixture(scope="session")
def rule1():
    return build_rule(1, 5)


@pytest.fixture(scope="session")
def rule2():
    return build_rule(2, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = {}


def record(criterion, passed, detail):
    """Store one acceptance line; printed in the terminal summary."""
    ACCEPTANCE[criterion] = (bool(passed), detail)
    print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
