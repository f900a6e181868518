import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptcavity import profiles as pf
from ptcavity.symmetry import (
    ct_group, dt_group, generate, mt_group, parse_element, reflection, rotation,
)

PT_ODD = ["linear_gradient", "half_disk", "pt_wheel", "radiation_hazard", "mt_sectors",
          "sphere_linear_gradient", "sphere_half", "sphere_north_gradient"]


def test_linear_gradient_values():
    g = pf.linear_gradient()
    assert abs(pf.evaluate(g, 0.5, math.pi / 2) - 0.5) < 1e-15
    for phi in np.linspace(-3, 3, 7):
        assert pf.evaluate(g, 0.1, phi) == 0.0


@pytest.mark.parametrize("name", PT_ODD)
def test_pt_odd_pointwise(name):
    g = pf.preset(name)
    rng = np.random.default_rng(0)
    r, phi = rng.uniform(0, 1, 400), rng.uniform(-math.pi, math.pi, 400)
    th = rng.uniform(0, math.pi, 400) if g.theta_dependent else None
    assert np.max(np.abs(pf.evaluate(g, r, phi, th) + pf.evaluate(g, r, -phi, th))) < 1e-12


@pytest.mark.parametrize("name", PT_ODD)
def test_angular_average_vanishes(name):
    g = pf.preset(name)
    phi = -math.pi + 2 * math.pi * (np.arange(4000) + 0.5) / 4000
    for r in (0.1, 0.5, 0.9):
        th = np.full_like(phi, 0.7) if g.theta_dependent else None
        assert abs(np.mean(pf.evaluate(g, r, phi, th))) < 1e-12


def test_rt_gradient_is_not_p_odd_but_rt_odd():
    g = pf.rt_gradient()
    assert abs(pf.evaluate(g, 0.5, 1.0) + pf.evaluate(g, 0.5, -1.0)) > 0.1
    assert pf.is_symmetry(g, parse_element("R_pi T"))


def test_presets_tile():
    for name in pf.PRESETS:
        pf.preset(name).check_tiling()


def test_overlapping_pieces_fail_tiling():
    bad = pf.GainLossProfile((pf.Piece((-math.pi, 1.0)), pf.Piece((0.0, math.pi))))
    with pytest.raises(pf.ProfileError):
        bad.check_tiling()


def test_piece_validation():
    with pytest.raises(pf.ProfileError):
        pf.Piece((1.0, 0.0))
    with pytest.raises(pf.ProfileError):
        pf.Piece((0.0, 1.0), (0.5, 1.5))


def test_validate_symmetry_examples():
    half = pf.half_disk()
    assert pf.validate_symmetry(half, parse_element("P_{pi/2}")) is pf.SymmetryAction.COMMUTES
    assert pf.validate_symmetry(half, rotation(math.pi)) is pf.SymmetryAction.ANTICOMMUTES
    lin = pf.linear_gradient()
    for s in pf.candidate_elements():
        act = pf.validate_symmetry(lin, s)
        if s == reflection(0):
            assert act is pf.SymmetryAction.ANTICOMMUTES
        elif not s.is_identity:
            assert act is pf.SymmetryAction.NEITHER


@pytest.mark.parametrize("name, group", [
    ("linear_gradient", generate([parse_element("PT")])),
    ("half_disk", dt_group(2)),
    ("pt_wheel", dt_group(4)),
    ("radiation_hazard", dt_group(6)),
    ("rt_gradient", ct_group(1)),
    ("mt_sectors", mt_group(3)),
])
def test_discovered_group_is_exactly_the_claimed_one(name, group):
    assert pf.discover_group(pf.preset(name)) == group


@pytest.mark.parametrize("v", [2, 3, 4])
def test_mt_sectors_family(v):
    assert pf.discover_group(pf.mt_sectors(v)) == mt_group(v)


def test_radiation_hazard_contains_named_elements():
    grp = pf.discover_group(pf.radiation_hazard())
    assert parse_element("P_{pi/2}") in grp and parse_element("R_{2pi/3}") in grp


@given(st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=30, deadline=None)
def test_profile_arithmetic(a, b):
    g = a * pf.pt_wheel() + pf.linear_gradient() * b
    r, phi = 0.6, 0.4
    ref = a * pf.evaluate(pf.pt_wheel(), r, phi) + b * pf.evaluate(pf.linear_gradient(), r, phi)
    assert abs(pf.evaluate(g, r, phi) - ref) < 1e-12


def test_unknown_preset():
    with pytest.raises(pf.ProfileError):
        pf.preset("spiral")
