import pytest
from sympy import factorint


def sympy_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorint(n).values())


@pytest.fixture(scope="session")
def squarefree_upto_150():
    return [D for D in range(2, 151) if sympy_squarefree(D)]


ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
