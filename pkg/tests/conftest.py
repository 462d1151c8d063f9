import numpy as np
import pytest

from affalg.examples import (bent_anchor_algebroid, broken_jacobi_algebroid, jet_algebroid, so3_algebroid,
                             time_anchor_algebroid, twisted_algebroid)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def jet():
    return jet_algebroid()


@pytest.fixture
def so3():
    return so3_algebroid()


@pytest.fixture
def twisted():
    return twisted_algebroid()


@pytest.fixture(params=["jet", "so3", "twisted"])
def valid(request):
    return {"jet": jet_algebroid, "so3": so3_algebroid, "twisted": twisted_algebroid}[request.param]()


@pytest.fixture(params=["time_anchor", "broken_jacobi", "bent_anchor"])
def broken(request):
    return {"time_anchor": time_anchor_algebroid, "broken_jacobi": broken_jacobi_algebroid,
            "bent_anchor": bent_anchor_algebroid}[request.param]()


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            lines += [value for name, value in getattr(rep, "user_properties", []) if name == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
