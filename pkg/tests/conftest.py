import numpy as np
import pytest

from trsm.config import load_config
from trsm.pipeline import build_context
from trsm.unitcell import SurrogateConfig, surrogate_tables

ACCEPTANCE = {}
N_CRITERIA = 12


@pytest.fixture(scope="session")
def default_ctx():
    return build_context(load_config())


@pytest.fixture(scope="session")
def lc_tables():
    freqs = np.round(np.arange(6.0e9, 9.0e9 + 1, 0.05e9), 3)
    return surrogate_tables(freqs, 401, SurrogateConfig.low_complexity())


@pytest.fixture
def acceptance():
    def record(number, title, ok, detail=""):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}  {detail}".rstrip()
        ACCEPTANCE[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        terminalreporter.write_line(ACCEPTANCE.get(n, f"criterion {n:2d} FAIL  (no result recorded)"))
