import numpy as np
import pytest

from imnoma.codec import SubblockSpec

SIGMA2_FU = 10 ** (-3 / 10)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=[(4, 1, 4), (4, 2, 4), (4, 3, 4), (4, 4, 4), (4, 4, 2), (4, 1, 2)],
                ids=lambda t: "n%d-k%d-M%d" % t)
def ref_spec(request):
    return SubblockSpec(*request.param)


def ci3(p, trials):
    """Three-sigma half width of a binomial proportion."""
    return 3.0 * np.sqrt(max(p * (1 - p), 1e-300) / trials)


ACCEPTANCE_LINES = []


def report(criterion, ok, detail=""):
    """Record one acceptance line, then fail the test if the criterion is not met."""
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
