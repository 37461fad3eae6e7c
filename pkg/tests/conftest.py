import numpy as np
import pytest

from streambench.core import ArrayStream


def blobs(n, centers, scale=0.3, seed=0):
    """Labelled Gaussian blobs, one label per center, cycling labels."""
    rng = np.random.default_rng(seed)
    centers = np.asarray(centers, dtype=np.float64)
    y = np.arange(n) % len(centers)
    rng.shuffle(y)
    X = centers[y] + rng.normal(scale=scale, size=(n, centers.shape[1]))
    return ArrayStream(X, y, len(centers))


@pytest.fixture
def two_blobs():
    return blobs(400, [[0.0, 0.0], [5.0, 5.0]])


ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def criterion():
    """Record one PASS/FAIL line per acceptance criterion; printed in the terminal summary."""
    def record(cid, ok, detail):
        line = f"{cid:<4} {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
