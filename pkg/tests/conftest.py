import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from viabhedge import market_tree as mt  # noqa: E402

settings.register_profile(
    "repo", deadline=None, max_examples=30, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")

F = Fraction


@pytest.fixture
def call_tree():
    return mt.generate_binomial(1, 2, F(1, 2), F(1, 2), 1)


@pytest.fixture
def binom2():
    return mt.generate_binomial(4, 2, F(1, 2), F(1, 2), 2)


@pytest.fixture
def demo():
    return mt.generate_arbitrage_demo()


def drift_down():
    """One period, price 1 -> {9/10, 8/10}."""
    return mt.TreeModel(1, 1, [
        mt.NodeRecord("r", None, 0, F(1), (F(1),)),
        mt.NodeRecord("a", "r", 1, F(1, 2), (F(9, 10),)),
        mt.NodeRecord("b", "r", 1, F(1, 2), (F(8, 10),)),
    ])


def single_path(prices):
    nodes = [mt.NodeRecord("n0", None, 0, F(1), (F(prices[0]),))]
    for t, p in enumerate(prices[1:], start=1):
        nodes.append(mt.NodeRecord(f"n{t}", f"n{t - 1}", t, F(1), (F(p),)))
    return mt.TreeModel(1, len(prices) - 1, nodes)


def rng_tree(seed, periods=None, max_branch=3, d=None, max_leaves=12, arbitrage_free=True):
    rng = random.Random(seed)
    periods = periods or rng.randint(1, 3)
    d = d or rng.randint(1, 2)
    return rng, mt.generate_random(rng, periods, max_branch, d, max_leaves, arbitrage_free=arbitrage_free)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for i in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[i])
