"""Hermitian (tau = 0) mode basis of a uniform Dirichlet disk or sphere.

Disk modes are J_m(n k r) cos(m phi) / J_m(n k r) sin(m phi); sphere modes are
j_l(n k r) times real spherical harmonics built from cos(m phi), sin(m phi).
Both are stored in the parity basis about the phi = 0 axis (plane), which is
the basis in which the gain/loss coupling blocks take their simplest form.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special as sp

from .special import bessel_zeros, spherical_bessel_zeros

__all__ = [
    "Parity",
    "Geometry",
    "DiskMode",
    "SphereMode",
    "BasisSpec",
    "enumerate_basis",
    "radial_norm",
    "evaluate_mode",
    "radial_factor",
    "azimuthal_factor",
    "polar_factor",
    "azimuthal_sign",
    "mode_labels",
]


class Parity(enum.Enum):
    EVEN = "e"
    ODD = "o"
    NONE = "n"

    @property
    def sign(self):
        """Eigenvalue under phi -> -phi (m = 0 modes count as even)."""
        return -1 if self is Parity.ODD else 1


class Geometry(enum.Enum):
    DISK = "disk"
    SPHERE = "sphere"


_PARITY_ORDER = {Parity.NONE: 0, Parity.EVEN: 1, Parity.ODD: 2}
_PARITY_MARK = {Parity.NONE: "", Parity.EVEN: "+", Parity.ODD: "-"}


@dataclass(frozen=True)
class DiskMode:
    m: int
    eta: int
    parity: Parity
    k: float
    zero: float
    radius: float = 1.0

    geometry = Geometry.DISK

    @property
    def azimuthal_order(self):
        return self.m

    @property
    def multiplet(self):
        return (self.m, self.eta)

    @property
    def label(self):
        return f"{self.m}{_PARITY_MARK[self.parity]}.{self.eta}"


@dataclass(frozen=True)
class SphereMode:
    l: int
    mz: int
    parity: Parity
    eta: int
    k: float
    zero: float
    radius: float = 1.0

    geometry = Geometry.SPHERE

    @property
    def azimuthal_order(self):
        return self.mz

    @property
    def multiplet(self):
        return (self.l, self.eta)

    @property
    def label(self):
        return f"{self.l}.{self.mz}{_PARITY_MARK[self.parity]}.{self.eta}"


Mode = Union[DiskMode, SphereMode]


@dataclass(frozen=True)
class BasisSpec:
    """Which modes to retain.

    ``order_max`` is m_max for the disk and l_max for the sphere.  At least one
    of ``k_window`` (a closed interval of k, in units of 1/R) and ``eta_max``
    must be given so the basis is finite.
    """

    geometry: Geometry = Geometry.DISK
    n: float = 3.3
    R: float = 1.0
    order_max: int = 20
    k_window: Optional[Tuple[float, float]] = None
    eta_max: Optional[int] = None

    def __post_init__(self):
        if isinstance(self.geometry, str):
            object.__setattr__(self, "geometry", Geometry(self.geometry))
        if not self.n > 1.0:
            raise ValueError(f"refractive index must exceed 1, got {self.n}")
        if not self.R > 0.0:
            raise ValueError(f"radius must be positive, got {self.R}")
        if self.order_max < 0:
            raise ValueError("order_max must be non-negative")
        if self.k_window is None and self.eta_max is None:
            raise ValueError("give k_window or eta_max to keep the basis finite")
        if self.k_window is not None:
            lo, hi = self.k_window
            object.__setattr__(self, "k_window", (float(lo), float(hi)))
        if self.eta_max is not None and self.eta_max < 1:
            raise ValueError("eta_max must be at least 1")


def _zeros_for(zero_fn, order, spec):
    if spec.k_window is None:
        return list(zero_fn(order, spec.eta_max))
    z_hi = spec.k_window[1] * spec.n * spec.R
    count, zs = 8, zero_fn(order, 8)
    while zs[-1] <= z_hi:
        count *= 2
        zs = zero_fn(order, count)
    zs = [z for z in zs if z <= z_hi]
    if spec.eta_max is not None:
        zs = zs[: spec.eta_max]
    return zs


def _in_window(k, spec):
    if spec.k_window is None:
        return True
    lo, hi = spec.k_window
    return lo <= k <= hi


def enumerate_basis(spec: BasisSpec) -> list:
    """All modes allowed by ``spec``, sorted by k with multiplets contiguous."""
    scale = spec.n * spec.R
    modes = []
    if spec.geometry is Geometry.DISK:
        for m in range(spec.order_max + 1):
            for eta, z in enumerate(_zeros_for(bessel_zeros, m, spec), start=1):
                k = float(z) / scale
                if not _in_window(k, spec):
                    continue
                if m == 0:
                    modes.append(DiskMode(0, eta, Parity.NONE, k, float(z), spec.R))
                else:
                    modes.append(DiskMode(m, eta, Parity.EVEN, k, float(z), spec.R))
                    modes.append(DiskMode(m, eta, Parity.ODD, k, float(z), spec.R))
        modes.sort(key=lambda md: (md.k, md.m, md.eta, _PARITY_ORDER[md.parity]))
    else:
        for l in range(spec.order_max + 1):
            for eta, z in enumerate(_zeros_for(spherical_bessel_zeros, l, spec), start=1):
                k = float(z) / scale
                if not _in_window(k, spec):
                    continue
                modes.append(SphereMode(l, 0, Parity.NONE, eta, k, float(z), spec.R))
                for mz in range(1, l + 1):
                    modes.append(SphereMode(l, mz, Parity.EVEN, eta, k, float(z), spec.R))
                    modes.append(SphereMode(l, mz, Parity.ODD, eta, k, float(z), spec.R))
        modes.sort(key=lambda md: (md.k, md.l, md.eta, md.mz, _PARITY_ORDER[md.parity]))
    return modes


def _radial_raw(mode, rho):
    if mode.geometry is Geometry.DISK:
        return sp.jv(mode.m, mode.zero * rho)
    return sp.spherical_jn(mode.l, mode.zero * rho)


def _radial_norm_unit(mode):
    # integral over rho in [0, 1] of raw^2 rho^(d-1), evaluated at a Dirichlet zero
    if mode.geometry is Geometry.DISK:
        return 0.5 * sp.jv(mode.m + 1, mode.zero) ** 2
    return 0.5 * sp.spherical_jn(mode.l + 1, mode.zero) ** 2


def radial_norm(mode: Mode) -> float:
    """Squared norm of the unnormalized mode over the cavity.

    Disk: the raw mode is J_m(n k r) cos(m phi) (or sin, or 1 for m = 0), so the
    norm is R^2 J_{m+1}(j)^2 / 2 times 2 pi (m = 0) or pi.  Sphere: the raw mode
    is j_l(n k r) times an orthonormal real harmonic, giving R^3 j_{l+1}(j)^2 / 2.
    Dividing the raw mode by sqrt(radial_norm) gives unit self-overlap.
    """
    unit = _radial_norm_unit(mode)
    if mode.geometry is Geometry.DISK:
        angular = 2 * math.pi if mode.m == 0 else math.pi
        return mode.radius ** 2 * unit * angular
    return mode.radius ** 3 * unit


def radial_factor(mode: Mode, rho):
    """Radial part in the scaled coordinate rho = r/R, unit-normalized with
    measure rho d rho (disk) or rho^2 d rho (sphere)."""
    return _radial_raw(mode, np.asarray(rho, dtype=float)) / math.sqrt(_radial_norm_unit(mode))


def azimuthal_factor(mode: Mode, phi):
    """Unit-normalized azimuthal part on [0, 2 pi)."""
    phi = np.asarray(phi, dtype=float)
    m = mode.azimuthal_order
    if mode.parity is Parity.NONE:
        return np.full_like(phi, 1.0 / math.sqrt(2 * math.pi))
    trig = np.cos if mode.parity is Parity.EVEN else np.sin
    return trig(m * phi) / math.sqrt(math.pi)


def polar_factor(mode: SphereMode, theta):
    """Associated Legendre part, unit-normalized with measure sin(theta) d theta."""
    l, m = mode.l, mode.mz
    c = math.sqrt((2 * l + 1) / 2 * math.factorial(l - m) / math.factorial(l + m))
    return c * sp.lpmv(m, l, np.cos(np.asarray(theta, dtype=float)))


def azimuthal_sign(mode: Mode) -> int:
    """+1 for cos-type (and m = 0) modes, -1 for sin-type."""
    return mode.parity.sign


def evaluate_mode(mode: Mode, *point):
    """Normalized real eigenfunction at (r, phi) for the disk or (r, theta, phi)
    for the sphere.  Accepts scalars or broadcastable arrays."""
    if mode.geometry is Geometry.DISK:
        if len(point) != 2:
            raise TypeError("disk modes take (r, phi)")
        r, phi = point
        rho = np.asarray(r, dtype=float) / mode.radius
        return radial_factor(mode, rho) * azimuthal_factor(mode, phi) / mode.radius
    if len(point) != 3:
        raise TypeError("sphere modes take (r, theta, phi)")
    r, theta, phi = point
    rho = np.asarray(r, dtype=float) / mode.radius
    return (
        radial_factor(mode, rho)
        * polar_factor(mode, theta)
        * azimuthal_factor(mode, phi)
        / mode.radius ** 1.5
    )


def mode_labels(modes: Sequence[Mode]):
    return [md.label for md in modes]
