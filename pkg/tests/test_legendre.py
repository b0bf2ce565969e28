import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from hbvm.legendre import (MAX_NODES, gauss_legendre_rule, shifted_legendre_eval,
                           shifted_legendre_primitive, shifted_legendre_table)


def test_examples():
    assert shifted_legendre_eval(0, 0.3) == pytest.approx(1.0)
    assert shifted_legendre_eval(1, 0.5) == pytest.approx(0.0, abs=1e-16)
    assert shifted_legendre_eval(2, 1.0) == pytest.approx(math.sqrt(5))
    assert shifted_legendre_primitive(1, 0.5) == pytest.approx(-math.sqrt(3) / 4, abs=1e-15)
    assert shifted_legendre_primitive(3, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert shifted_legendre_primitive(0, 0.7) == pytest.approx(0.7)


def test_negative_degree():
    with pytest.raises(ValueError):
        shifted_legendre_eval(-1, 0.5)
    with pytest.raises(ValueError):
        shifted_legendre_primitive(-2, 0.5)


def test_orthonormal():
    rule = gauss_legendre_rule(30)
    P = shifted_legendre_table(20, rule.c)
    G = P.T @ (rule.b[:, None] * P)
    assert np.max(np.abs(G - np.eye(21))) < 1e-13


@settings(max_examples=40, deadline=None)
@given(j=st.integers(0, 12), c=st.floats(0.0, 1.0))
def test_primitive_matches_quad(j, c):
    ref, _ = quad(lambda x: shifted_legendre_eval(j, x), 0.0, c, epsabs=1e-14, epsrel=1e-13)
    assert shifted_legendre_primitive(j, c) == pytest.approx(ref, abs=1e-12)


def test_table_shape():
    x = np.linspace(0, 1, 7).reshape(7, 1)
    assert shifted_legendre_table(4, x).shape == (7, 1, 5)


@pytest.mark.parametrize("k", [1, 2, 3, 7, 20, 40, 64])
def test_rule_matches_numpy(k):
    t, w = np.polynomial.legendre.leggauss(k)
    rule = gauss_legendre_rule(k)
    assert np.max(np.abs(rule.c - 0.5 * (t + 1))) < 1e-14
    assert np.max(np.abs(rule.b - 0.5 * w)) < 1e-14


@pytest.mark.parametrize("k", range(1, 41))
def test_exactness_and_symmetry(k):
    rule = gauss_legendre_rule(k)
    assert abs(rule.integrate(lambda x: x ** (2 * k - 1)) - 1.0 / (2 * k)) <= 1e-13
    half = k // 2
    assert np.all(rule.c[k - half:] == 1.0 - rule.c[:half][::-1])
    assert np.all(rule.b == rule.b[::-1])
    assert np.all(np.diff(rule.c) > 0) and np.all(rule.b > 0)
    assert abs(rule.b.sum() - 1.0) < 1e-14


def test_one_node():
    rule = gauss_legendre_rule(1)
    assert rule.c.tolist() == [0.5] and rule.b.tolist() == [1.0]


@pytest.mark.parametrize("k", [0, -1, MAX_NODES + 1])
def test_rule_range(k):
    with pytest.raises(ValueError):
        gauss_legendre_rule(k)


def test_rule_readonly():
    rule = gauss_legendre_rule(5)
    with pytest.raises(ValueError):
        rule.c[0] = 0.0
