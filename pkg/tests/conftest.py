"""Shared helpers for the test suite.

Expected values tagged as derived in the tests are computed with the local
oracles below (plain math, independent of the package code paths) and then
frozen into assertions.
"""

import math

import numpy as np
import pytest


def h2(x: float) -> float:
    """Binary entropy oracle, direct evaluation."""
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def shannon(probs) -> float:
    """Shannon entropy oracle, direct evaluation in bits."""
    return float(sum(-p * math.log2(p) for p in probs if p > 0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
