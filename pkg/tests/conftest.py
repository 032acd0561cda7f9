import random
from fractions import Fraction

import pytest

from pow2digits.digits import WeightFunction

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def rational_weights(rng, max_num=12, max_den=6):
    while True:
        w = tuple(Fraction(rng.randint(0, max_num), rng.randint(1, max_den)) for _ in range(10))
        if any(w):
            return WeightFunction(w)


@pytest.fixture
def rng():
    return random.Random(12345)
