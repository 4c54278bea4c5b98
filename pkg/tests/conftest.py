import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from seqknap.blocks import to_msp
from seqknap.generate import GenParams, gen_random
from seqknap.instance import load_instance
from seqknap.optima import RestrictedProblem

DATA = Path(__file__).parent / "data"

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def key(w, q, h=None):
    """Translate 1-based (type, class[, part]) labels into 0-based keys."""
    if h is None:
        return (w - 1, q - 1)
    return (w - 1, q - 1, h - 1)


@pytest.fixture(scope="session")
def example_path():
    return str(DATA / "three_knapsacks.json")


@pytest.fixture(scope="session")
def example(example_path):
    return load_instance(example_path)


@pytest.fixture(scope="session")
def example_msp(example):
    return to_msp(example)


@pytest.fixture(scope="session")
def four_types(example_msp):
    """Block types 1..4, classes 1..2, capacities (1, 6, 8)."""
    return RestrictedProblem(example_msp, 3, 1, (1, 6, 8))


seeds = st.integers(min_value=0, max_value=10**6)


def small_instance(seed, **overrides):
    """Random instance kept small enough for exhaustive checks."""
    fields = {"max_types": 4, "max_knapsacks": 2, "max_bound": 2, "max_capacity": 8, **overrides}
    return gen_random(seed, GenParams(**fields))


def random_problem(seed, data):
    """A restricted problem over a small random instance, with drawn k, b and F."""
    msp = to_msp(small_instance(seed, max_types=4, max_capacity=10))
    b = data.draw(st.integers(0, msp.l - 1))
    k = data.draw(st.integers(0, msp.t - 1))
    lower_k = data.draw(st.integers(k, msp.t - 1)) if b else k
    F = []
    for h in range(msp.l):
        d = min(msp.sizes[h], msp.sizes[b])
        F.append(data.draw(st.integers(0, 12 // d)) * d)
    return RestrictedProblem(msp, k, b, tuple(F), lower_k)


def pytest_terminal_summary(terminalreporter):
    results = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
