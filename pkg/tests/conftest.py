import numpy as np
import pytest

from liquidlab.mesh import TriMesh, box_mesh, icosphere

_ACCEPTANCE_RESULTS = {}


def pytest_runtest_logreport(report):
    """Collect acceptance-test outcomes so the summary can print one
    pass/fail line per criterion."""
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        _ACCEPTANCE_RESULTS[name] = report.passed
    elif report.failed:  # setup/teardown error counts as a failure
        _ACCEPTANCE_RESULTS[name] = False


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE_RESULTS):
        verdict = "PASS" if _ACCEPTANCE_RESULTS[name] else "FAIL"
        terminalreporter.write_line(f"[{verdict}] {name}")


@pytest.fixture
def unit_cube():
    return box_mesh((1.0, 1.0, 1.0))


@pytest.fixture
def bumpy_blob():
    """Asymmetric closed mesh: jittered icosphere, off-center."""
    rng = np.random.default_rng(7)
    sph = icosphere(0.4, subdivisions=2)
    verts = sph.vertices + rng.normal(0.0, 0.03, sph.vertices.shape)
    return TriMesh(verts + np.array([0.13, -0.07, 0.21]), sph.faces)


@pytest.fixture
def numpy_path(monkeypatch):
    """Force the pure-numpy kernels for the duration of a test."""
    import liquidlab.accel

    monkeypatch.setattr(liquidlab.accel, "NUMBA_ENABLED", False)
