from collections import Counter

import numpy as np
import pytest
import sympy as sp

from topoquant.symbolic import Context


def random_tree(rng, syms, depth):
    """Random expression over ``syms`` with depth at most ``depth``."""
    if depth == 0 or rng.random() < 0.4:
        if rng.random() < 0.7:
            return syms[rng.integers(len(syms))]
        return sp.Integer(int(rng.integers(1, 4)))
    op = rng.integers(8)
    a = random_tree(rng, syms, depth - 1)
    if op < 4:
        b = random_tree(rng, syms, depth - 1)
        return (a + b, a - b, a * b, a / (b ** 2 + 1))[op]
    return (sp.sin(a), sp.cos(a), sp.exp(a / 3), sp.sqrt(a ** 2 + 1))[op - 4]


@pytest.fixture
def xy():
    ctx = Context().coordinate("x").coordinate("y")
    return ctx, ctx["x"], ctx["y"]


# Property-suite bookkeeping: suites bump INSTANCES, outcomes land in
# OUTCOMES, and the acceptance module runs last so it can read both.
INSTANCES: Counter = Counter()
OUTCOMES: dict = {}


def pytest_collection_modifyitems(items):
    items.sort(key=lambda it: it.path.name == "test_acceptance.py")


def pytest_runtest_logreport(report):
    if report.when == "call" or report.outcome != "passed":
        OUTCOMES[report.nodeid] = report.outcome
