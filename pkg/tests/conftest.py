import sys

import numpy as np
import pytest
from hypothesis import settings

from aperiodic import apfunctions as apf
from aperiodic import pointsets as pts

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def fib_chain():
    # cut-and-project Fibonacci chain, comfortably wider than [-1e4, 1e4]
    return pts.fibonacci_model_set(1.2e4)


@pytest.fixture(scope="session")
def fib_tiling():
    return pts.fibonacci_substitution_points(17)


@pytest.fixture(scope="session")
def fib_triangle(fib_tiling):
    return apf.fibonacci_triangle(fib_tiling, apf.Grid.covering(-1200.0, 1100.0, 0.01))


@pytest.fixture(scope="session")
def squarefree_1e6():
    return pts.squarefree_points(10**6)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
