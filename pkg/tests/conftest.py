import pytest

from hypspec import spectrum, surface


@pytest.fixture(scope="session")
def genus2_mesh():
    fn = surface.FNCoordinates(surface.genus2_graph(), [1.0, 1.0, 1.0])
    return surface.build_mesh(fn, surface.MeshParams(h=0.1, n_theta=64))


@pytest.fixture(scope="session")
def pinched_mesh():
    fn = surface.FNCoordinates(surface.genus2_graph(), [0.2, 1.0, 1.0])
    return surface.build_mesh(fn, surface.MeshParams(h=0.1, n_theta=64))


@pytest.fixture(scope="session")
def pinched_solution(pinched_mesh):
    return spectrum.solve_surface(pinched_mesh, k=3)


_ACCEPTANCE = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects ``(number, ok, summary)`` lines printed after the run."""
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, text in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {text}")
