import numpy as np
import pytest

from qtda.complex import Skeleton, build_skeleton, pairwise_distances

SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def random_skeleton(rng, n, p=0.5):
    a = np.triu(rng.random((n, n)) < p, 1)
    return Skeleton(a | a.T)


def octahedron():
    return Skeleton(np.array([[i != j and i // 2 != j // 2 for j in range(6)] for i in range(6)]))


@pytest.fixture
def square_c4():
    return build_skeleton(pairwise_distances(SQUARE), 1.1)


@pytest.fixture
def path3():
    return Skeleton.from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def k3():
    return Skeleton.complete(3)


#: (criterion number, report line), filled by test_acceptance.py
ACCEPTANCE: list[tuple[int, str]] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
