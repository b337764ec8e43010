import numpy as np
import pytest
from hypothesis import strategies as st

from dispersive_lab.coefficients import EquationSpec
from dispersive_lab.suites import reference_examples


@pytest.fixture(scope="session")
def examples():
    return reference_examples()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


unit = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, unit, unit)


@st.composite
def specs(draw, m_min=1, m_max=4):
    m = draw(st.integers(m_min, m_max))
    a = draw(st.lists(cplx, min_size=2 * m, max_size=2 * m))
    b = draw(st.lists(cplx, min_size=2 * m, max_size=2 * m))
    return EquationSpec(m, tuple(a), tuple(b))


@st.composite
def diagonal_specs(draw, m_min=1, m_max=3):
    m = draw(st.integers(m_min, m_max))
    a = draw(st.lists(cplx, min_size=2 * m, max_size=2 * m))
    return EquationSpec(m, tuple(a), (0j,) * (2 * m))


# one line per acceptance criterion, printed after the run
ACCEPTANCE = {}


def record(n, ok, detail):
    line = f"criterion {str(n):>3}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[n] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE, key=lambda k: (int(str(k).rstrip("abcdefghijklmnopqrstuvwxyz")), str(k))):
            terminalreporter.write_line(ACCEPTANCE[n])
