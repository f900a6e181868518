"""Bessel functions, their zeros, and Gauss-Legendre rules.

Evaluation is delegated to :mod:`scipy.special`; zeros are located here by
scanning for sign changes and polishing each bracket with Brent's method, so
every returned zero is backed by a verified bracket.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize, special

__all__ = [
    "QuadratureRule",
    "bessel_j",
    "bessel_zero",
    "bessel_zeros",
    "spherical_bessel_j",
    "spherical_bessel_zero",
    "spherical_bessel_zeros",
    "gauss_legendre",
]

_SCAN_STEP = 0.25  # zeros of J_m and j_l are spaced by more than 2.9


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.nodes)

    def mapped(self, a, b):
        """Nodes and weights transformed to the interval [a, b]."""
        half = 0.5 * (b - a)
        return half * self.nodes + 0.5 * (a + b), half * self.weights

    def integrate(self, f, a=-1.0, b=1.0):
        x, w = self.mapped(a, b)
        return float(np.dot(w, f(x)))


def bessel_j(m, x):
    """Cylindrical Bessel function J_m(x) for integer m >= 0, x >= 0."""
    if m < 0:
        raise ValueError("order must be non-negative")
    if np.any(np.asarray(x) < 0):
        raise ValueError("argument must be non-negative")
    return special.jv(m, x)


def spherical_bessel_j(l, x):
    """Spherical Bessel function j_l(x) for integer l >= 0, x >= 0."""
    if l < 0:
        raise ValueError("order must be non-negative")
    if np.any(np.asarray(x) < 0):
        raise ValueError("argument must be non-negative")
    return special.spherical_jn(l, x)


def _scan_zeros(f, start, count):
    roots = []
    a, fa = start, f(start)
    while len(roots) < count:
        b = a + _SCAN_STEP
        fb = f(b)
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0.0:
            roots.append(optimize.brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))
        a, fa = b, fb
    return np.array(roots[:count])


@lru_cache(maxsize=512)
def _cyl_zeros(m, count):
    # the first zero of J_m exceeds m, and J_m > 0 on (0, m]
    return _scan_zeros(lambda x: special.jv(m, x), max(m, 0.5 * _SCAN_STEP), count)


@lru_cache(maxsize=512)
def _sph_zeros(l, count):
    return _scan_zeros(lambda x: special.spherical_jn(l, x), max(l, 0.5 * _SCAN_STEP), count)


def _grow(cache_fn, order, count):
    size = 8
    while size < count:
        size *= 2
    return cache_fn(order, size)[:count]


def bessel_zeros(m, count):
    """First ``count`` positive zeros of J_m, ascending."""
    if m < 0 or count < 0:
        raise ValueError("order and count must be non-negative")
    return _grow(_cyl_zeros, int(m), int(count)).copy()


def bessel_zero(m, eta):
    """The eta-th positive zero j_{m,eta} of J_m (eta >= 1)."""
    if eta < 1:
        raise ValueError("zero index eta starts at 1")
    return float(bessel_zeros(m, eta)[eta - 1])


def spherical_bessel_zeros(l, count):
    """First ``count`` positive zeros of j_l, ascending."""
    if l < 0 or count < 0:
        raise ValueError("order and count must be non-negative")
    return _grow(_sph_zeros, int(l), int(count)).copy()


def spherical_bessel_zero(l, eta):
    """The eta-th positive zero of j_l (eta >= 1)."""
    if eta < 1:
        raise ValueError("zero index eta starts at 1")
    return float(spherical_bessel_zeros(l, eta)[eta - 1])


@lru_cache(maxsize=64)
def _leggauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n):
    """N-point Gauss-Legendre rule on [-1, 1]."""
    if n < 1:
        raise ValueError("need at least one node")
    x, w = _leggauss(int(n))
    return QuadratureRule(x, w)
