import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")

# acceptance verdicts, printed in the terminal summary
VERDICTS: dict = {}


@pytest.fixture
def record_verdict():
    def _record(number: int, passed: bool, detail: str):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
        VERDICTS[number] = line
        print(line)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[k])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
