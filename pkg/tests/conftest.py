import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from spherefd.synth import ShapeSpec, generate_structure  # noqa: E402


@pytest.fixture(scope="session")
def pd_octahedron():
    return generate_structure(ShapeSpec("fccOctahedron", order=6))


@pytest.fixture(scope="session")
def pd_cube():
    return generate_structure(ShapeSpec("fccCube", order=2))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines):
        terminalreporter.write_line(lines[key])
