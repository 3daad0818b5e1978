import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mealypred import (
    MealyMachine,
    alternating_ring,
    biased_unbiased_ring,
    constant_machine,
    delay_machine,
    echo_machine,
    eight_state_example,
)


@pytest.fixture
def echo():
    return echo_machine()


@pytest.fixture
def delay():
    return delay_machine()


@pytest.fixture
def alt_ring():
    return alternating_ring()


@pytest.fixture
def const0():
    return constant_machine(0)


@pytest.fixture
def const1():
    return constant_machine(1)


@pytest.fixture
def demo8():
    return eight_state_example()


@pytest.fixture
def half_biased_ring():
    return biased_unbiased_ring()


@pytest.fixture
def absorbing_machine():
    # state 2 absorbs and is biased; reachable from both other states
    return MealyMachine(
        3,
        ((0, 2), (2, 0), (2, 2)),
        ((0, 1), (1, 0), (1, 1)),
    )
