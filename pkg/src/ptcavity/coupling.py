"""Assembly of the coupled-mode system: the gain/loss overlap matrix G and the
diagonal E of squared basis frequencies.

For normalized modes psi_j the entries are G_ij = integral of g psi_i psi_j
over the cavity.  With the piecewise profile representation every entry is a
sum over pieces of (radial integral) x (angular integral).  The phi integrals
are elementary and done in closed form; radial (and, on the sphere, polar)
integrals use Gauss-Legendre on each piece.  G does not depend on R.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .basis import Geometry, Parity, mode_labels, polar_factor, radial_factor
from .profiles import GainLossProfile, Piece
from .special import gauss_legendre

__all__ = [
    "CouplingSystem",
    "angular_overlap",
    "radial_overlap",
    "polar_overlap",
    "assemble",
    "write_matrix_csv",
    "GeometryMismatch",
]

RADIAL_ORDER = 200
POLAR_ORDER = 96


class GeometryMismatch(ValueError):
    pass


@dataclass(frozen=True)
class CouplingSystem:
    basis: tuple
    G: np.ndarray
    k: np.ndarray
    n: float

    @property
    def E(self):
        return np.diag(self.k ** 2)

    @property
    def size(self):
        return len(self.basis)

    @property
    def geometry(self):
        return self.basis[0].geometry if self.basis else None

    def tau_tilde(self, tau):
        return tau / self.n ** 2

    def labels(self):
        return mode_labels(self.basis)

    def index_of(self, label):
        return self.labels().index(label)

    def subsystem(self, indices: Sequence[int]) -> "CouplingSystem":
        idx = list(indices)
        return CouplingSystem(tuple(self.basis[i] for i in idx), self.G[np.ix_(idx, idx)].copy(),
                              self.k[idx].copy(), self.n)


# ---------------------------------------------------------------- angular

def _ramp_cos(K, a, b, s, o):
    """Integral over [a, b] of (s x + o) cos(K x), K an integer array."""
    K = np.asarray(K, dtype=float)
    nz = K != 0
    Ks = np.where(nz, K, 1.0)

    def F(x):
        return s * (np.cos(Ks * x) / Ks ** 2 + x * np.sin(Ks * x) / Ks) + o * np.sin(Ks * x) / Ks

    zero_case = s * (b * b - a * a) / 2 + o * (b - a)
    return np.where(nz, F(b) - F(a), zero_case)


def _ramp_sin(K, a, b, s, o):
    """Integral over [a, b] of (s x + o) sin(K x)."""
    K = np.asarray(K, dtype=float)
    nz = K != 0
    Ks = np.where(nz, K, 1.0)

    def F(x):
        return s * (np.sin(Ks * x) / Ks ** 2 - x * np.cos(Ks * x) / Ks) - o * np.cos(Ks * x) / Ks

    return np.where(nz, F(b) - F(a), 0.0)


def _trig_params(modes):
    m = np.array([md.azimuthal_order for md in modes], dtype=int)
    is_sin = np.array([md.parity is Parity.ODD for md in modes])
    c = np.where(m == 0, 1 / math.sqrt(2 * math.pi), 1 / math.sqrt(math.pi))
    return m, is_sin, c


def _angular_matrix(modes_i, modes_j, piece: Piece):
    mi, si, ci = _trig_params(modes_i)
    mj, sj, cj = _trig_params(modes_j)
    Mi, Mj = mi[:, None], mj[None, :]
    Si, Sj = si[:, None], sj[None, :]
    a, b = piece.phi
    s, o = piece.slope, piece.offset
    cm = _ramp_cos(Mi - Mj, a, b, s, o)
    cp = _ramp_cos(Mi + Mj, a, b, s, o)
    sp_ = _ramp_sin(Mi + Mj, a, b, s, o)
    sm_ij = _ramp_sin(Mi - Mj, a, b, s, o)
    out = np.where(~Si & ~Sj, cm + cp, 0.0)
    out = np.where(Si & Sj, cm - cp, out)
    out = np.where(Si & ~Sj, sp_ + sm_ij, out)
    out = np.where(~Si & Sj, sp_ - sm_ij, out)
    return 0.5 * ci[:, None] * cj[None, :] * out


def angular_overlap(profile_or_pieces, mode_a, mode_b) -> float:
    """Integral over phi of g_angular times the two normalized azimuthal
    factors, summed over pieces.  Radial and polar extents are ignored, so
    this is the angular factor of a separable piece set."""
    pieces = getattr(profile_or_pieces, "pieces", profile_or_pieces)
    total = 0.0
    for p in pieces:
        if not p.is_zero:
            total += float(_angular_matrix([mode_a], [mode_b], p)[0, 0])
    return total


# ---------------------------------------------------------------- radial / polar

def _radial_weights(geometry, interval, order):
    x, w = gauss_legendre(order).mapped(*interval)
    power = 1 if geometry is Geometry.DISK else 2
    return x, w * x ** power


def _radial_matrix(modes, interval, order):
    x, w = _radial_weights(modes[0].geometry, interval, order)
    F = np.array([radial_factor(md, x) for md in modes])
    return (F * w) @ F.T


def radial_overlap(mode_a, mode_b, interval=(0.0, 1.0), order: int = RADIAL_ORDER) -> float:
    """Integral of the two normalized radial factors over rho in ``interval``
    with measure rho d rho (disk) or rho^2 d rho (sphere)."""
    if mode_a.geometry is not mode_b.geometry:
        raise GeometryMismatch("modes belong to different geometries")
    x, w = _radial_weights(mode_a.geometry, interval, order)
    return float(np.dot(w, radial_factor(mode_a, x) * radial_factor(mode_b, x)))


def _polar_matrix(modes, interval, order):
    # quadrature in theta itself: P_l^m P_l'^m' sin(theta) is smooth in theta
    # even when m + m' is odd, unlike its form in cos(theta)
    x, w = gauss_legendre(order).mapped(*interval)
    F = np.array([polar_factor(md, x) for md in modes])
    return (F * (w * np.sin(x))) @ F.T


def polar_overlap(mode_a, mode_b, interval=(0.0, math.pi), order: int = POLAR_ORDER) -> float:
    x, w = gauss_legendre(order).mapped(*interval)
    return float(np.dot(w * np.sin(x), polar_factor(mode_a, x) * polar_factor(mode_b, x)))


# ---------------------------------------------------------------- assembly

def assemble(basis, profile: GainLossProfile, n: float = 3.3,
             radial_order: int = RADIAL_ORDER, polar_order: int = POLAR_ORDER) -> CouplingSystem:
    """Coupling system for ``basis`` under ``profile``; tau enters at solve time."""
    modes = tuple(basis)
    if not n > 1.0:
        raise ValueError(f"refractive index must exceed 1, got {n}")
    k = np.array([md.k for md in modes], dtype=float)
    N = len(modes)
    G = np.zeros((N, N))
    if N == 0:
        return CouplingSystem(modes, G, k, float(n))
    geometry = modes[0].geometry
    if any(md.geometry is not geometry for md in modes):
        raise GeometryMismatch("basis mixes disk and sphere modes")
    if geometry is Geometry.DISK and profile.theta_dependent:
        raise GeometryMismatch("profile depends on theta but the basis is a disk")

    radial_cache, polar_cache = {}, {}
    for p in profile.pieces:
        if p.is_zero:
            continue
        if p.r not in radial_cache:
            radial_cache[p.r] = _radial_matrix(modes, p.r, radial_order)
        block = radial_cache[p.r] * _angular_matrix(modes, modes, p)
        if geometry is Geometry.SPHERE:
            if p.theta not in polar_cache:
                polar_cache[p.theta] = _polar_matrix(modes, p.theta, polar_order)
            block = block * polar_cache[p.theta]
        G += block
    G = 0.5 * (G + G.T)
    return CouplingSystem(modes, G, k, float(n))


def write_matrix_csv(path, system: CouplingSystem, which: str = "G"):
    """Write G or E with mode labels as row and column headers."""
    mat = {"G": system.G, "E": system.E}[which]
    labels = system.labels()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([which] + labels)
        for lab, row in zip(labels, mat):
            w.writerow([lab] + [format(float(v), ".17g") for v in row])
