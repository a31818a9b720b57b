import numpy as np
import pytest

from overparam.data import gen_gaussian_sphere, gen_orthogonal


@pytest.fixture
def orth8():
    return gen_orthogonal(8, seed=3)


@pytest.fixture
def sphere():
    return gen_gaussian_sphere(10, 20, seed=7)


def rand_sym(rng, n):
    A = rng.standard_normal((n, n))
    return A + A.T


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
