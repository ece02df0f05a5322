from __future__ import annotations

import sys

import numpy as np
import pytest

from biham.linalg import random_angles, random_hermitian, random_positive, random_unitary
from biham.points import PhasePoint, ReducedPoint, Torus


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=[2, 3, 4])
def n(request):
    return request.param


def phase_point(rng, n, scale=1.0):
    return PhasePoint(random_unitary(rng, n), random_hermitian(rng, n, scale))


def reduced_point(rng, n, scale=1.0, positive=False, min_gap=0.3):
    L = random_positive(rng, n, 0.5) if positive else random_hermitian(rng, n, scale)
    return ReducedPoint(Torus(random_angles(rng, n, min_gap)), L)


def ginibre(rng, n):
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = sorted(getattr(mod, "VERDICTS", []), key=lambda s: int(s.split()[2].rstrip(":")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
