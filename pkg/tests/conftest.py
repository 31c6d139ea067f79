import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cdglab.basis import reference_element
from cdglab.forms import DGSpace
from cdglab.mesh import assign_switches, build_structured_mesh

settings.register_profile("cdglab", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("cdglab")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_space(n=2, p=2, periodic=False, switch="consistent", diagonal="up"):
    mesh = build_structured_mesh(n, periodic=periodic, diagonal=diagonal)
    basis = reference_element(p)
    return mesh, basis, assign_switches(mesh, switch), DGSpace(mesh, basis)


# one summary line per acceptance criterion, printed after the test run
CRITERIA: dict = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    prev = CRITERIA.get(number)
    CRITERIA[number] = (ok and (prev is None or prev[0]), detail if prev is None else f"{prev[1]}; {detail}")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        ok, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
