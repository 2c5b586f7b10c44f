import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heurflood.rules import FloodRule, forward_probability, heuristic, probabilistic, uninformed

alphas = st.floats(0.01, 0.999)
degrees = st.integers(1, 10_000)


def test_heuristic_degree_one_neighbor_always_forwards():
    assert forward_probability(heuristic(0.99), 3, 1) == 1.0
    assert forward_probability(heuristic(0.5), 1, 400) == 1.0


def test_probabilistic_is_constant():
    for a, b in [(1, 1), (3, 9), (100, 2)]:
        assert forward_probability(probabilistic(0.6), a, b) == 0.6


def test_heuristic_value_against_high_precision():
    mpmath.mp.dps = 50
    expected = (1 - mpmath.mpf("0.1") ** (mpmath.mpf(1) / 4)) / mpmath.mpf("0.9")
    got = forward_probability(heuristic(0.90), 4, 7)
    assert got == pytest.approx(float(expected), abs=1e-13)
    assert got == pytest.approx(0.48629, abs=1e-5)


def test_uninformed():
    assert forward_probability(uninformed(), 7, 9) == 1.0


@pytest.mark.parametrize("a,b", [(0, 3), (3, 0)])
def test_zero_degree_is_a_contract_violation(a, b):
    with pytest.raises(ValueError):
        forward_probability(heuristic(0.9), a, b)


@pytest.mark.parametrize("kind,param", [
    ("probabilistic", -0.1), ("probabilistic", 1.1), ("heuristic", 1.0),
    ("heuristic", 0.0), ("uninformed", 0.3), ("probabilistic", None), ("gossip", 0.5),
])
def test_rule_validation(kind, param):
    with pytest.raises(ValueError):
        FloodRule(kind, param)


def test_vectorized():
    a = np.array([1, 2, 5, 50])
    out = forward_probability(heuristic(0.95), a, a[::-1])
    assert out.shape == (4,)
    assert out[0] == out[3] == 1.0


@given(alphas, degrees, degrees)
def test_heuristic_symmetric(alpha, a, b):
    rule = heuristic(alpha)
    assert forward_probability(rule, a, b) == forward_probability(rule, b, a)


@given(alphas, degrees)
def test_heuristic_nonincreasing_in_min_degree(alpha, m):
    rule = heuristic(alpha)
    assert forward_probability(rule, m + 1, m + 1) <= forward_probability(rule, m, m)


@given(alphas, degrees, degrees)
def test_heuristic_reproduces_target_reach(alpha, a, b):
    # 1 - alpha = [1 - alpha + alpha (1 - h)]**min(a, b)
    h = forward_probability(heuristic(alpha), a, b)
    m = min(a, b)
    assert abs((1 - alpha + alpha * (1 - h)) ** m - (1 - alpha)) < 1e-12


@given(alphas)
def test_heuristic_large_degree_decay(alpha):
    m = 10**7
    h = forward_probability(heuristic(alpha), m, m)
    assert h < 1e-5
    assert h == pytest.approx(-np.log1p(-alpha) / (alpha * m), rel=1e-6)
