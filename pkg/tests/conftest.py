import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from kcore_ocs.model import make_instance

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_instance(rng, max_m=6, max_n=5, max_k=3, delay=None, releases="mixed", mode="ocs",
                    density=0.4, weights="random"):
    M = int(rng.integers(1, max_m + 1))
    N = int(rng.integers(1, max_n + 1))
    K = int(rng.integers(1, max_k + 1))
    demands = [np.where(rng.random((N, N)) < density, rng.uniform(0.5, 20, (N, N)), 0.0) for _ in range(M)]
    d = float(rng.choice([0.0, 1.0, 8.0])) if delay is None else delay
    if mode == "eps":
        d = 0.0
    if releases == "zero" or (releases == "mixed" and rng.random() < 0.5):
        rel = [0.0] * M
    else:
        rel = list(rng.uniform(0, 30, M) * (rng.random(M) < 0.6))
    w = list(rng.integers(1, 5, M).astype(float)) if weights == "random" else None
    return make_instance(demands, list(rng.uniform(1, 30, K)), d, w, rel, mode)


@st.composite
def instances(draw, max_m=5, max_n=4, max_k=3, mode="ocs"):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_instance(np.random.default_rng(seed), max_m, max_n, max_k, mode=mode)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
