import sys
import itertools

import pytest

from knapmix.core import KnapsackInstance


@pytest.fixture
def small_instance():
    return KnapsackInstance((5, 3, 2, 1), 9)


def brute_force(instance):
    """Feasible vectors by plain iteration over all 0/1 tuples."""
    return [
        x
        for x in itertools.product((0, 1), repeat=instance.n)
        if sum(a * v for a, v in zip(instance.weights, x)) <= instance.budget
    ]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
        terminalreporter.write_line(line)
