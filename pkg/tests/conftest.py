import numpy as np
import pytest

from quadcorridor import BoundaryConditions, Corridor, PhysicalParams, Scenario


@pytest.fixture
def params():
    return PhysicalParams()


def line_scenario(distance=1.4, half_length=1.0, radius=0.5, params=None):
    """One corridor along +x centered at the origin, at rest at both ends."""
    p = params or PhysicalParams()
    c = Corridor(np.zeros(3), np.array([1.0, 0.0, 0.0]), radius, half_length)
    bc = BoundaryConditions(
        np.array([-distance / 2, 0.0, 0.0]), np.zeros(3), np.array([distance / 2, 0.0, 0.0]), np.zeros(3), p.hover_thrust
    )
    return Scenario(p, bc, (c,))


def two_corridor_scenario(params=None):
    """An L-shaped pair: 1.5 m along +x, then 1.5 m along +y, overlapping 0.1 m."""
    p = params or PhysicalParams()
    a = Corridor(np.array([0.75, 0.0, 0.0]), np.array([1.0, 0.0, 0.0]), 0.3, 0.85)
    b = Corridor(np.array([1.5, 0.75, 0.0]), np.array([0.0, 1.0, 0.0]), 0.3, 0.85)
    bc = BoundaryConditions(np.zeros(3), np.zeros(3), np.array([1.5, 1.5, 0.0]), np.zeros(3), p.hover_thrust)
    return Scenario(p, bc, (a, b))


# one pass/fail line per acceptance criterion, printed after the run
_criteria = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("detail", "")
        _criteria[report.nodeid] = (report.outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (outcome, detail) in sorted(_criteria.items(), key=lambda kv: int(kv[0].split("_criterion_")[1].split("_")[0])):
        name = nodeid.split("::")[-1]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}  {detail}")
