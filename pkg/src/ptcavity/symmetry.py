"""Generalized antiunitary point groups of the disk.

Spatial operations act on the polar angle only.  ``R_a`` is a clockwise
rotation by ``a`` (phi -> phi - a); ``P_b`` is the reflection about the
b, b + pi axis (phi -> 2b - phi).  Any element may carry a T flag (complex
conjugation, i.e. gain <-> loss).  Angles are exact fractions of 2 pi so that
group closure and element equality are decided in integer arithmetic.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

__all__ = [
    "Kind",
    "SymmetryElement",
    "SymmetryGroup",
    "GroupError",
    "identity",
    "rotation",
    "reflection",
    "compose",
    "generate",
    "verify_half_t",
    "dt_group",
    "ct_group",
    "mt_group",
    "AngularParity",
    "angular_parity_of_pair",
    "SelectionRule",
    "selection_rule",
    "parse_element",
]


class GroupError(ValueError):
    pass


class Kind(enum.Enum):
    ROTATION = "R"
    REFLECTION = "P"


def _as_turns(angle) -> Fraction:
    """Accept a Fraction of 2 pi (turns) or a float angle in radians that is a
    rational multiple of pi with small denominator."""
    if isinstance(angle, Fraction):
        return angle
    if isinstance(angle, int):
        return Fraction(angle)
    turns = Fraction(float(angle) / (2 * math.pi)).limit_denominator(10_000)
    if abs(float(turns) * 2 * math.pi - float(angle)) > 1e-9:
        raise ValueError(f"angle {angle!r} is not a rational multiple of pi")
    return turns


@dataclass(frozen=True)
class SymmetryElement:
    kind: Kind
    turns: Fraction  # rotation angle or reflection-axis angle, in units of 2 pi
    t: bool = False

    def __post_init__(self):
        turns = Fraction(self.turns)
        period = Fraction(1) if self.kind is Kind.ROTATION else Fraction(1, 2)
        object.__setattr__(self, "turns", turns % period)

    @property
    def angle(self) -> float:
        """Angle in radians, in [0, 2 pi)."""
        return float(self.turns) * 2 * math.pi

    @property
    def spatial(self) -> "SymmetryElement":
        return SymmetryElement(self.kind, self.turns, False)

    @property
    def is_identity(self) -> bool:
        return self.kind is Kind.ROTATION and self.turns == 0 and not self.t

    def with_t(self, t=True) -> "SymmetryElement":
        return SymmetryElement(self.kind, self.turns, t)

    def inverse(self) -> "SymmetryElement":
        if self.kind is Kind.ROTATION:
            return SymmetryElement(Kind.ROTATION, -self.turns, self.t)
        return self

    def map_angle(self, phi):
        """Image of the polar angle phi under the spatial part."""
        phi = np.asarray(phi, dtype=float)
        if self.kind is Kind.ROTATION:
            return phi - self.angle
        return 2 * self.angle - phi

    def __str__(self):
        return format_element(self)

    def __repr__(self):
        return f"<{format_element(self)}>"


def identity() -> SymmetryElement:
    return SymmetryElement(Kind.ROTATION, Fraction(0), False)


def rotation(angle, t=False) -> SymmetryElement:
    """Clockwise rotation; ``angle`` in radians or as a Fraction of 2 pi."""
    return SymmetryElement(Kind.ROTATION, _as_turns(angle), t)


def reflection(axis, t=False) -> SymmetryElement:
    """Reflection about the axis at ``axis`` (radians or Fraction of 2 pi)."""
    return SymmetryElement(Kind.REFLECTION, _as_turns(axis), t)


def compose(a: SymmetryElement, b: SymmetryElement) -> SymmetryElement:
    """a o b: apply b first, then a.  T flags combine by XOR."""
    t = a.t != b.t
    if a.kind is Kind.ROTATION and b.kind is Kind.ROTATION:
        return SymmetryElement(Kind.ROTATION, a.turns + b.turns, t)
    if a.kind is Kind.REFLECTION and b.kind is Kind.REFLECTION:
        # phi -> 2a - (2b - phi) = phi - 2(b - a)
        return SymmetryElement(Kind.ROTATION, 2 * (b.turns - a.turns), t)
    if a.kind is Kind.ROTATION:
        # phi -> (2b - phi) - a
        return SymmetryElement(Kind.REFLECTION, b.turns - a.turns / 2, t)
    # phi -> 2a - (phi - b)
    return SymmetryElement(Kind.REFLECTION, a.turns + b.turns / 2, t)


def _format_turns(turns: Fraction) -> str:
    # express the angle as a multiple of pi
    x = turns * 2
    if x == 0:
        return "0"
    if x == 1:
        return "pi"
    num = "" if x.numerator == 1 else str(x.numerator)
    if x.denominator == 1:
        return f"{{{num}pi}}"
    return f"{{{num}pi/{x.denominator}}}"


def format_element(e: SymmetryElement) -> str:
    if e.kind is Kind.ROTATION:
        if e.turns == 0:
            return "T" if e.t else "1"
        body = f"R_{_format_turns(e.turns)}"
    else:
        if e.turns == 0:
            return "PT" if e.t else "P"
        body = f"P_{_format_turns(e.turns)}"
    return body + (" T" if e.t else "")


def parse_element(text: str) -> SymmetryElement:
    """Inverse of the pretty printer: '1', 'PT', 'RT', 'R_{pi/2} T', 'P_{3pi/4}'..."""
    s = text.strip()
    t = False
    if s in ("1",):
        return identity()
    if s in ("P", "PT", "R", "RT", "T"):
        kind = Kind.REFLECTION if s[0] == "P" else Kind.ROTATION
        turns = Fraction(0) if s[0] in "PT" else Fraction(1, 2)
        return SymmetryElement(kind, turns, s.endswith("T"))
    if s.endswith("T"):
        t = True
        s = s[:-1].strip()
    if len(s) < 3 or s[0] not in "RP" or s[1] != "_":
        raise ValueError(f"cannot parse symmetry element {text!r}")
    kind = Kind.ROTATION if s[0] == "R" else Kind.REFLECTION
    body = s[2:].strip("{}").replace(" ", "")
    if body == "0":
        x = Fraction(0)
    else:
        if "pi" not in body:
            raise ValueError(f"angle in {text!r} must be a multiple of pi")
        num, _, den = body.partition("pi")
        num = num.strip("*") or "1"
        if num == "-":
            num = "-1"
        den = den.lstrip("/") or "1"
        x = Fraction(int(num), int(den))
    return SymmetryElement(kind, x / 2, t)


class SymmetryGroup:
    """A finite set of elements closed under composition."""

    def __init__(self, elements: Iterable[SymmetryElement]):
        self.elements = frozenset(elements)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(sorted(self.elements, key=_sort_key))

    def __contains__(self, item):
        return item in self.elements

    def __eq__(self, other):
        if isinstance(other, SymmetryGroup):
            return self.elements == other.elements
        return NotImplemented

    def __hash__(self):
        return hash(self.elements)

    def __repr__(self):
        return "{" + ", ".join(str(e) for e in self) + "}"

    @property
    def t_elements(self):
        return [e for e in self if e.t]

    @property
    def has_t(self):
        return any(e.t for e in self.elements)

    def is_closed(self) -> bool:
        return all(compose(a, b) in self.elements for a in self.elements for b in self.elements)

    def names(self):
        return [str(e) for e in self]


def _sort_key(e: SymmetryElement):
    return (e.kind is Kind.REFLECTION, e.turns, e.t)


def generate(generators: Iterable[SymmetryElement], max_size: int = 256) -> SymmetryGroup:
    """Smallest closed set containing the generators and the identity."""
    gens = list(generators)
    if not gens:
        raise GroupError("need at least one generator")
    elements = {identity(), *gens}
    frontier = list(elements)
    while frontier:
        new = []
        for a in frontier:
            for g in gens:
                for c in (compose(a, g), compose(g, a)):
                    if c not in elements:
                        elements.add(c)
                        new.append(c)
                        if len(elements) > max_size:
                            raise GroupError(
                                f"group generated by {gens} exceeds {max_size} elements"
                            )
        frontier = new
    return SymmetryGroup(elements)


def verify_half_t(group: SymmetryGroup) -> bool:
    """Exactly half of the elements carry T (or none do)."""
    n_t = sum(1 for e in group.elements if e.t)
    return n_t == 0 or 2 * n_t == len(group)


def _check_antiunitary(group: SymmetryGroup, name: str) -> SymmetryGroup:
    if identity().with_t() in group:
        raise GroupError(f"{name} contains T itself; the gain/loss profile would vanish")
    return group


def dt_group(v: int) -> SymmetryGroup:
    """DT_2v: the dihedral group of a v-gon with PT = P_0 T and P_{pi/v}."""
    if v < 2 or v % 2:
        raise GroupError("DT_2v needs an even v >= 2 to be compatible with PT")
    return _check_antiunitary(
        generate([reflection(Fraction(0), True), reflection(Fraction(1, 2 * v))]), f"DT_{2 * v}"
    )


def ct_group(v: int) -> SymmetryGroup:
    """CT_2v: cyclic group generated by R_{pi/v} T."""
    if v < 1:
        raise GroupError("CT_2v needs v >= 1")
    return _check_antiunitary(generate([rotation(Fraction(1, 2 * v), True)]), f"CT_{2 * v}")


def mt_group(v: int) -> SymmetryGroup:
    """MT_2v: v plain rotations and v reflections, every reflection times T."""
    if v < 2:
        raise GroupError("MT_2v needs v >= 2")
    return _check_antiunitary(
        generate([reflection(Fraction(0), True), rotation(Fraction(1, v))]), f"MT_{2 * v}"
    )


class AngularParity(enum.Enum):
    EVEN = "even"
    ODD = "odd"
    NOT_EIGEN = "not-eigen"


def angular_parity_of_pair(m: int, element: SymmetryElement) -> AngularParity:
    """How sin(2 m phi), the angular part of a degenerate pair's product
    cos(m phi) sin(m phi), transforms under the element's spatial part."""
    if m < 1:
        raise ValueError("degenerate pairs have m >= 1")
    if element.kind is Kind.ROTATION:
        # sin(2m(phi - a)) with a = 2 pi q: shift by 2 m q turns of 2 pi
        shift = (2 * m * element.turns) % 1
        if shift == 0:
            return AngularParity.EVEN
        if shift == Fraction(1, 2):
            return AngularParity.ODD
        return AngularParity.NOT_EIGEN
    # sin(2m(2b - phi)) = sin(4 m b) cos(2 m phi) - cos(4 m b) sin(2 m phi)
    x = (4 * m * element.turns) % 1  # 4 m b in units of 2 pi
    if x == 0:
        return AngularParity.ODD
    if x == Fraction(1, 2):
        return AngularParity.EVEN
    return AngularParity.NOT_EIGEN


@dataclass(frozen=True)
class SelectionRule:
    forced_zero: bool
    witness: Optional[SymmetryElement] = None
    reason: str = ""

    def __bool__(self):
        return self.forced_zero


def _pair_projection(group: SymmetryGroup, m: int):
    """Coefficients (cos, sin) of sum_s chi(s) sin(2 m s(phi)) / |group|,
    where chi = -1 for T-carrying elements."""
    a = b = 0.0
    for e in group.elements:
        chi = -1.0 if e.t else 1.0
        th = 2 * m * e.angle
        if e.kind is Kind.ROTATION:
            # sin(2m phi - th)
            a += chi * -math.sin(th)
            b += chi * math.cos(th)
        else:
            # sin(2 th - 2m phi)
            a += chi * math.sin(2 * th)
            b += chi * -math.cos(2 * th)
    n = len(group)
    return a / n, b / n


def selection_rule(group: SymmetryGroup, m: int, tol: float = 1e-12) -> SelectionRule:
    """Is the intra-pair coupling G_eo of the (m, e)/(m, o) pair forced to zero?

    A plain element under which sin(2 m phi) is odd, or a T-carrying element
    under which it is even, makes the integrand g sin(2 m phi) odd and is
    returned as the witness.  When no single element works, the integrand is
    averaged over the whole group; a vanishing average still forces G_eo = 0
    (witness None, reason 'group-average').
    """
    for e in sorted(group.elements, key=_witness_key):
        par = angular_parity_of_pair(m, e)
        if (not e.t and par is AngularParity.ODD) or (e.t and par is AngularParity.EVEN):
            return SelectionRule(True, e, "element")
    a, b = _pair_projection(group, m)
    if abs(a) < tol and abs(b) < tol:
        return SelectionRule(True, None, "group-average")
    return SelectionRule(False, None, "")


def _witness_key(e: SymmetryElement):
    # P_{pi/2} and R_pi T protect every m, so report them first when present
    named = (e.kind is Kind.REFLECTION and e.turns == Fraction(1, 4) and not e.t) or (
        e.kind is Kind.ROTATION and e.turns == Fraction(1, 2) and e.t)
    return (not named, e.t, e.kind is Kind.ROTATION, e.turns)
