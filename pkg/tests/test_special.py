import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptcavity.special import (
    bessel_j,
    bessel_zero,
    bessel_zeros,
    gauss_legendre,
    spherical_bessel_j,
    spherical_bessel_zero,
    spherical_bessel_zeros,
)


def test_bessel_at_origin():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(1, 0.0) == 0.0
    assert bessel_j(5, 0.0) == 0.0


def test_first_zero_of_j0_is_a_root():
    assert abs(bessel_j(0, 2.404825557695773)) < 1e-10


@given(st.integers(0, 12), st.floats(0.0, 50.0))
@settings(max_examples=200, deadline=None)
def test_bessel_matches_mpmath(m, x):
    ref = float(mpmath.besselj(m, x))
    got = bessel_j(m, x)
    assert abs(got - ref) <= 1e-12 * max(1.0, abs(ref)) + 1e-300


def test_negative_argument_rejected():
    with pytest.raises(ValueError):
        bessel_j(0, -1.0)
    with pytest.raises(ValueError):
        spherical_bessel_j(-1, 1.0)


@pytest.mark.parametrize("m, eta, expected", [(0, 1, 2.404825557695773), (2, 2, 8.417244140399864)])
def test_bessel_zero_values(m, eta, expected):
    assert abs(bessel_zero(m, eta) - expected) < 1e-10


def test_bessel_zeros_against_mpmath():
    for m in range(0, 8):
        for eta, z in enumerate(bessel_zeros(m, 6), start=1):
            assert abs(z - float(mpmath.besseljzero(m, eta))) < 1e-10


def test_zero_index_starts_at_one():
    with pytest.raises(ValueError):
        bessel_zero(0, 0)


def test_k0_of_restored_phase_example():
    assert abs(bessel_zero(0, 3) / 3.3 - 2.622) < 0.005


def test_zero_interlacing_and_residual():
    zs = {m: bessel_zeros(m, 8) for m in range(0, 16)}
    for m in range(0, 15):
        for eta in range(7):
            assert zs[m][eta] < zs[m + 1][eta] < zs[m][eta + 1]
    for m, arr in zs.items():
        assert np.all(np.diff(arr) > 0)
        assert np.max(np.abs(bessel_j(m, arr))) <= 1e-9


def test_spherical_values():
    assert abs(spherical_bessel_zero(0, 1) - math.pi) < 1e-10
    assert abs(spherical_bessel_j(0, math.pi / 2) - 2 / math.pi) < 1e-12
    assert abs(spherical_bessel_zero(1, 1) - 4.493409457909064) < 1e-10


def test_spherical_zeros_of_j0_are_multiples_of_pi():
    np.testing.assert_allclose(spherical_bessel_zeros(0, 6), math.pi * np.arange(1, 7), atol=1e-10)


@given(st.integers(0, 6), st.floats(0.01, 40.0))
@settings(max_examples=100, deadline=None)
def test_spherical_matches_mpmath(l, x):
    ref = float(mpmath.sqrt(mpmath.pi / (2 * x)) * mpmath.besselj(l + 0.5, x))
    assert abs(spherical_bessel_j(l, x) - ref) <= 1e-12 * max(1.0, abs(ref))


def test_gauss_legendre_small_rules():
    r1 = gauss_legendre(1)
    assert r1.nodes.tolist() == [0.0] and r1.weights.tolist() == [2.0]
    r2 = gauss_legendre(2)
    np.testing.assert_allclose(r2.nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)], atol=1e-15)
    np.testing.assert_allclose(r2.weights, [1.0, 1.0], atol=1e-15)
    assert abs(gauss_legendre(5).integrate(lambda x: x ** 8) - 2 / 9) < 1e-13


@given(st.integers(1, 60))
@settings(max_examples=40, deadline=None)
def test_quadrature_invariants(n):
    rule = gauss_legendre(n)
    assert abs(rule.weights.sum() - 2.0) < 1e-13
    assert np.all(np.diff(rule.nodes) > 0)
    assert np.all(rule.weights > 0)
    for p in range(0, 2 * n):
        exact = 0.0 if p % 2 else 2.0 / (p + 1)
        assert abs(rule.integrate(lambda x: x ** p) - exact) < 1e-12


@pytest.mark.parametrize("n", [64, 100, 200])
def test_quadrature_convergence_on_bessel_product(n):
    z = bessel_zero(2, 1)
    f = lambda x: bessel_j(2, x) ** 2 * x
    a = gauss_legendre(n).integrate(f, 0.0, z)
    b = gauss_legendre(2 * n).integrate(f, 0.0, z)
    assert abs(a - b) < 1e-11
