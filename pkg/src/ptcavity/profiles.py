"""Gain/loss profiles g as sums of piecewise-analytic pieces.

Each piece is the indicator of an annular sector (times an optional polar band
on the sphere) multiplied by ``slope * phi + offset``.  Keeping the angular
form analytic lets the coupling integrals over phi be done in closed form.
Radial bounds are in units of the cavity radius.  With tau >= 0, g < 0 is
gain and g > 0 is loss.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .symmetry import (
    GroupError,
    Kind,
    SymmetryElement,
    SymmetryGroup,
    identity,
    reflection,
    rotation,
)

__all__ = [
    "Piece",
    "GainLossProfile",
    "SymmetryAction",
    "evaluate",
    "validate_symmetry",
    "discover_group",
    "antiunitary_elements",
    "PRESETS",
    "preset",
    "linear_gradient",
    "half_disk",
    "pt_wheel",
    "radiation_hazard",
    "rt_gradient",
    "mt_sectors",
    "uniform",
    "sphere_linear_gradient",
    "sphere_half",
    "sphere_north_gradient",
    "is_symmetry",
    "candidate_elements",
    "ProfileError",
]

TWO_PI = 2 * math.pi


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class Piece:
    phi: Tuple[float, float]
    r: Tuple[float, float] = (0.0, 1.0)
    slope: float = 0.0
    offset: float = 0.0
    theta: Tuple[float, float] = (0.0, math.pi)

    def __post_init__(self):
        a, b = self.phi
        if not b > a or b - a > TWO_PI + 1e-12:
            raise ProfileError(f"angular interval {self.phi} must have 0 < length <= 2 pi")
        ra, rb = self.r
        if not 0.0 <= ra < rb <= 1.0:
            raise ProfileError(f"radial interval {self.r} must satisfy 0 <= r_a < r_b <= 1")
        ta, tb = self.theta
        if not 0.0 <= ta < tb <= math.pi + 1e-15:
            raise ProfileError(f"polar interval {self.theta} must lie in [0, pi]")

    @property
    def is_zero(self):
        return self.slope == 0.0 and self.offset == 0.0

    @property
    def full_polar(self):
        return self.theta[0] == 0.0 and self.theta[1] >= math.pi

    def local_phi(self, phi):
        """Representative of phi in [phi_a, phi_a + 2 pi)."""
        a = self.phi[0]
        return a + np.mod(np.asarray(phi, dtype=float) - a, TWO_PI)

    def contains(self, rho, phi, theta=None):
        lp = self.local_phi(phi)
        rho = np.asarray(rho, dtype=float)
        inside = (lp < self.phi[1]) & (rho >= self.r[0]) & (rho < self.r[1])
        if self.r[1] == 1.0:
            inside |= (lp < self.phi[1]) & (rho == 1.0)
        if theta is not None and not self.full_polar:
            th = np.asarray(theta, dtype=float)
            inside &= (th >= self.theta[0]) & (th < self.theta[1])
        return inside

    def value(self, phi):
        return self.slope * self.local_phi(phi) + self.offset

    def scaled(self, c):
        return replace(self, slope=self.slope * c, offset=self.offset * c)


@dataclass(frozen=True)
class GainLossProfile:
    """g = sum of pieces.  Presets tile the cavity, so at every point exactly
    one piece applies; sums of profiles simply superpose."""

    pieces: Tuple[Piece, ...]
    name: Optional[str] = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))

    def __add__(self, other):
        return GainLossProfile(self.pieces + other.pieces, None)

    def __mul__(self, c):
        return GainLossProfile(tuple(p.scaled(c) for p in self.pieces), None)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    @property
    def nonzero_pieces(self):
        return tuple(p for p in self.pieces if not p.is_zero)

    @property
    def theta_dependent(self):
        return any(not p.full_polar for p in self.pieces)

    def radial_breaks(self):
        pts = {0.0, 1.0}
        for p in self.pieces:
            pts.update(p.r)
        return sorted(pts)

    def coverage(self, rho, phi, theta=None):
        """Number of pieces covering each point (1 everywhere for a tiling)."""
        count = np.zeros(np.broadcast(np.asarray(rho), np.asarray(phi)).shape, dtype=int)
        for p in self.pieces:
            count = count + p.contains(rho, phi, theta)
        return count

    def check_tiling(self, n_phi=721, n_r=37):
        rho, phi, theta = _sample_grid(n_phi, n_r, self.theta_dependent)
        cov = self.coverage(rho, phi, theta)
        if np.any(cov != 1):
            bad = np.argwhere(cov != 1)[0]
            raise ProfileError(
                f"pieces of profile {self.name or '<custom>'} do not tile the cavity "
                f"(coverage {cov[tuple(bad)]} near rho={rho[tuple(bad)]:.3f}, "
                f"phi={phi[tuple(bad)]:.3f})"
            )


def evaluate(profile: GainLossProfile, r, phi, theta=None):
    """Pointwise g at scaled radius r (= r/R), polar angle phi and, on the
    sphere, polar angle theta.  Boundaries are half-open [a, b)."""
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    out = np.zeros(np.broadcast(r, phi).shape if theta is None
                   else np.broadcast(r, phi, np.asarray(theta)).shape)
    for p in profile.pieces:
        if p.is_zero:
            continue
        out = out + np.where(p.contains(r, phi, theta), p.value(phi), 0.0)
    return out if out.ndim else float(out)


class SymmetryAction(enum.Enum):
    COMMUTES = "commutes"
    ANTICOMMUTES = "anticommutes"
    NEITHER = "neither"


def _sample_grid(n_phi, n_r, with_theta):
    # generic offsets keep samples and their images off piece boundaries
    phi = -math.pi + TWO_PI * (np.arange(n_phi) + 0.3819660112501051) / n_phi
    rho = (np.arange(n_r) + 0.5) / n_r
    if with_theta:
        th = math.pi * (np.arange(11) + 0.4142135623730951) / 11
        R, P, T = np.meshgrid(rho, phi, th, indexing="ij")
        return R, P, T
    R, P = np.meshgrid(rho, phi, indexing="ij")
    return R, P, None


def validate_symmetry(
    profile: GainLossProfile, element: SymmetryElement, tol: float = 1e-10,
    n_phi: int = 997, n_r: int = 23,
) -> SymmetryAction:
    """Compare g o s^-1 with g for the spatial part s of ``element``.

    COMMUTES means s itself is a symmetry; ANTICOMMUTES means s T is one.
    """
    rho, phi, theta = _sample_grid(n_phi, n_r, profile.theta_dependent)
    g = evaluate(profile, rho, phi, theta)
    g_img = evaluate(profile, rho, element.spatial.inverse().map_angle(phi), theta)
    if np.max(np.abs(g_img - g)) <= tol:
        return SymmetryAction.COMMUTES
    if np.max(np.abs(g_img + g)) <= tol:
        return SymmetryAction.ANTICOMMUTES
    return SymmetryAction.NEITHER


def is_symmetry(profile, element, tol=1e-10) -> bool:
    action = validate_symmetry(profile, element, tol)
    if element.t:
        return action is SymmetryAction.ANTICOMMUTES
    return action is SymmetryAction.COMMUTES


def candidate_elements(divisions: int = 24):
    """Rotations by multiples of pi/divisions and reflections about axes at
    multiples of pi/(2 divisions), without T.  The finer axis lattice keeps
    the candidate set closed under composition."""
    rots = [rotation(Fraction(k, 2 * divisions)) for k in range(2 * divisions)]
    refs = [reflection(Fraction(k, 4 * divisions)) for k in range(2 * divisions)]
    return rots + refs


def discover_group(profile: GainLossProfile, divisions: int = 24, tol: float = 1e-10) -> SymmetryGroup:
    """Symmetry group of g among rotations/reflections on a pi/divisions lattice.

    Each spatial element enters bare if it leaves g invariant, or multiplied by
    T if it flips the sign of g.
    """
    rho, phi, theta = _sample_grid(997, 23, profile.theta_dependent)
    g = evaluate(profile, rho, phi, theta)
    if np.max(np.abs(g)) <= tol:
        raise ProfileError("profile vanishes identically")
    found = []
    for s in candidate_elements(divisions):
        g_img = evaluate(profile, rho, s.inverse().map_angle(phi), theta)
        if np.max(np.abs(g_img - g)) <= tol:
            found.append(s)
        elif np.max(np.abs(g_img + g)) <= tol:
            found.append(s.with_t())
    group = SymmetryGroup(found)
    if not group.is_closed():
        raise GroupError(f"discovered symmetries of {profile.name} are not closed: {group}")
    return group


def antiunitary_elements(group: SymmetryGroup):
    """T-carrying elements, PT first when present."""
    pt = reflection(Fraction(0), True)
    els = [e for e in group if e.t]
    els.sort(key=lambda e: (e != pt, e.kind is Kind.ROTATION, e.turns))
    return els


# ---------------------------------------------------------------- presets

def _core(core, pieces):
    if core > 0.0:
        return (Piece((-math.pi, math.pi), (0.0, core)),) + tuple(pieces)
    return tuple(pieces)


def _sectors(signs, core=0.0, start=-math.pi, theta=(0.0, math.pi)):
    w = TWO_PI / len(signs)
    return _core(core, [
        Piece((start + i * w, start + (i + 1) * w), (core, 1.0), 0.0, float(s), theta)
        for i, s in enumerate(signs)
    ])


def linear_gradient(core: float = 0.2) -> GainLossProfile:
    """g = phi/pi on -pi < phi < pi outside r = core R, zero inside."""
    return GainLossProfile(
        _core(core, [Piece((-math.pi, math.pi), (core, 1.0), 1 / math.pi, 0.0)]),
        "linear_gradient", {"core": core},
    )


def half_disk(core: float = 0.0) -> GainLossProfile:
    """+1 (loss) on 0 < phi < pi, -1 (gain) on the other half."""
    return GainLossProfile(_sectors([-1, 1], core), "half_disk", {"core": core})


def pt_wheel(core: float = 0.0) -> GainLossProfile:
    """Uniform +-1 quadrants: g = sign(sin 2 phi)."""
    return GainLossProfile(_sectors([1, -1, 1, -1], core), "pt_wheel", {"core": core})


def radiation_hazard(core: float = 0.0) -> GainLossProfile:
    """Six 60-degree sectors of alternating sign: g = sign(sin 3 phi)."""
    return GainLossProfile(
        _sectors([-1, 1, -1, 1, -1, 1], core), "radiation_hazard", {"core": core}
    )


def rt_gradient(core: float = 0.2) -> GainLossProfile:
    """phi/pi on 0 < phi < pi and -(phi + pi)/pi on -pi < phi < 0, outside
    r = core R.  Odd under rotation by pi, not under phi -> -phi."""
    return GainLossProfile(
        _core(core, [
            Piece((-math.pi, 0.0), (core, 1.0), -1 / math.pi, -1.0),
            Piece((0.0, math.pi), (core, 1.0), 1 / math.pi, 0.0),
        ]),
        "rt_gradient", {"core": core},
    )


def mt_sectors(v: int = 3, core: float = 0.0) -> GainLossProfile:
    """v sawtooth periods, each a loss block and a gain block: g is invariant
    under rotation by 2 pi/v and odd under every reflection P_{k pi/v}."""
    if v < 2:
        raise ProfileError("mt_sectors needs v >= 2")
    half = math.pi / v
    pieces = []
    for k in range(v):
        c = TWO_PI * k / v
        slope, offset = v / math.pi, -c * v / math.pi
        pieces.append(Piece((c - half, c), (core, 1.0), slope, offset))
        pieces.append(Piece((c, c + half), (core, 1.0), slope, offset))
    return GainLossProfile(_core(core, pieces), f"mt_sectors", {"v": v, "core": core})


def uniform(value: float = 1.0) -> GainLossProfile:
    """Constant g; with value 1 the coupling matrix is the overlap matrix."""
    return GainLossProfile((Piece((-math.pi, math.pi), (0.0, 1.0), 0.0, float(value)),), "uniform",
                           {"value": value})


def sphere_linear_gradient(core: float = 0.0) -> GainLossProfile:
    """Azimuthal gradient g = phi/pi, independent of theta."""
    prof = linear_gradient(core)
    return replace(prof, name="sphere_linear_gradient")


def sphere_half(core: float = 0.0) -> GainLossProfile:
    prof = half_disk(core)
    return replace(prof, name="sphere_half")


def sphere_north_gradient(core: float = 0.0) -> GainLossProfile:
    """g = phi/pi on the northern hemisphere (theta < pi/2), zero on the
    southern one.  Breaking z -> -z lets m = 0 modes couple to odd m = 1 modes."""
    north = (0.0, math.pi / 2)
    south = (math.pi / 2, math.pi)
    pieces = [
        Piece((-math.pi, math.pi), (core, 1.0), 1 / math.pi, 0.0, north),
        Piece((-math.pi, math.pi), (core, 1.0), 0.0, 0.0, south),
    ]
    return GainLossProfile(_core(core, pieces), "sphere_north_gradient", {"core": core})


PRESETS = {
    "linear_gradient": linear_gradient,
    "half_disk": half_disk,
    "pt_wheel": pt_wheel,
    "radiation_hazard": radiation_hazard,
    "rt_gradient": rt_gradient,
    "mt_sectors": mt_sectors,
    "uniform": uniform,
    "sphere_linear_gradient": sphere_linear_gradient,
    "sphere_half": sphere_half,
    "sphere_north_gradient": sphere_north_gradient,
}

SPHERE_PRESETS = {"sphere_linear_gradient", "sphere_half", "sphere_north_gradient", "uniform"}


def preset(name: str, **params) -> GainLossProfile:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ProfileError(f"unknown preset {name!r}; known: {', '.join(sorted(PRESETS))}") from None
    return factory(**params)
