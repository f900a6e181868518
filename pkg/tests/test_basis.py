import math

import numpy as np
import pytest
from scipy import integrate

from ptcavity.basis import (
    BasisSpec,
    DiskMode,
    Geometry,
    Parity,
    enumerate_basis,
    evaluate_mode,
    radial_norm,
)
from ptcavity.coupling import assemble
from ptcavity.profiles import uniform
from ptcavity.special import bessel_j, bessel_zero


def test_m0_window_of_restored_phase_example():
    # (0, 2) sits at k = 1.673, so the window must reach below 2 to hold both
    assert [(m.m, m.eta) for m in enumerate_basis(BasisSpec(k_window=(2.0, 3.0), order_max=0))] == [(0, 3)]
    modes = enumerate_basis(BasisSpec(k_window=(1.6, 3.0), order_max=0))
    assert [(m.m, m.eta) for m in modes] == [(0, 2), (0, 3)]
    assert abs(modes[0].k - 5.5201 / 3.3) < 1e-4
    assert abs(modes[1].k - 2.62) < 0.005


def test_degenerate_pairs_share_k_exactly():
    modes = enumerate_basis(BasisSpec(k_window=(0.0, 4.0), order_max=10))
    by_key = {}
    for md in modes:
        by_key.setdefault((md.m, md.eta), []).append(md)
    for (m, eta), group in by_key.items():
        if m == 0:
            assert [g.parity for g in group] == [Parity.NONE]
        else:
            assert sorted(g.parity.value for g in group) == ["e", "o"]
            assert group[0].k == group[1].k


def test_sorted_and_multiplets_contiguous():
    modes = enumerate_basis(BasisSpec(k_window=(0.0, 4.0), order_max=10))
    ks = [m.k for m in modes]
    assert ks == sorted(ks)
    for i in range(len(modes) - 1):
        if modes[i].parity is Parity.EVEN:
            assert modes[i + 1].parity is Parity.ODD and modes[i + 1].m == modes[i].m


def test_empty_window_is_not_an_error():
    assert enumerate_basis(BasisSpec(k_window=(0.1, 0.2), order_max=3)) == []


def test_sphere_l1_triple():
    modes = enumerate_basis(BasisSpec(Geometry.SPHERE, k_window=(1.3, 1.4), order_max=1))
    assert len(modes) == 3
    assert len({m.k for m in modes}) == 1
    assert {m.label for m in modes} == {"1.0.1", "1.1+.1", "1.1-.1"}


def test_invalid_specs():
    with pytest.raises(ValueError):
        BasisSpec(n=1.0, eta_max=1)
    with pytest.raises(ValueError):
        BasisSpec(R=0.0, eta_max=1)
    with pytest.raises(ValueError):
        BasisSpec()


def test_radial_norm_disk_m0_against_quadrature():
    z = bessel_zero(0, 1)
    md = DiskMode(0, 1, Parity.NONE, z / 3.3, z, 1.0)
    raw, _ = integrate.quad(lambda r: bessel_j(0, z * r) ** 2 * r, 0, 1, epsabs=1e-14, epsrel=1e-13)
    assert abs(radial_norm(md) - 2 * math.pi * raw) < 1e-12
    self_overlap, _ = integrate.dblquad(
        lambda phi, r: evaluate_mode(md, r, phi) ** 2 * r, 0, 1, -math.pi, math.pi,
        epsabs=1e-12, epsrel=1e-12)
    assert abs(self_overlap - 1.0) < 1e-10


def test_sphere_l1_self_overlap_against_quadrature():
    md = [m for m in enumerate_basis(BasisSpec(Geometry.SPHERE, k_window=(1.3, 1.4), order_max=1))
          if m.label == "1.1-.1"][0]
    val, _ = integrate.tplquad(
        lambda phi, th, r: evaluate_mode(md, r, th, phi) ** 2 * r * r * math.sin(th),
        0, 1, 0, math.pi, -math.pi, math.pi, epsabs=1e-11, epsrel=1e-11)
    assert abs(val - 1.0) < 1e-9


@pytest.mark.parametrize("radius", [1.0, 2.5])
def test_overlap_matrix_is_identity(radius):
    for geo, win in ((Geometry.DISK, (0.0, 4.0)), (Geometry.SPHERE, (0.0, 3.0))):
        modes = enumerate_basis(BasisSpec(geo, R=radius, k_window=(win[0] / radius, win[1] / radius),
                                          order_max=6))
        G = assemble(modes, uniform()).G
        assert np.max(np.abs(G - np.eye(len(modes)))) < 1e-9


def test_mode_parity_and_boundary():
    modes = enumerate_basis(BasisSpec(k_window=(0.0, 3.0), order_max=5))
    rng = np.random.default_rng(1)
    r, phi = rng.uniform(0, 1, 50), rng.uniform(-math.pi, math.pi, 50)
    for md in modes:
        a, b = evaluate_mode(md, r, phi), evaluate_mode(md, r, -phi)
        if md.parity is Parity.ODD:
            np.testing.assert_allclose(a, -b, atol=1e-14)
            assert abs(evaluate_mode(md, 0.5, 0.0)) < 1e-15
        else:
            np.testing.assert_allclose(a, b, atol=1e-14)
        assert np.max(np.abs(evaluate_mode(md, 1.0, phi))) < 1e-9


def test_helmholtz_residual_by_finite_differences():
    n = 3.3
    modes = enumerate_basis(BasisSpec(k_window=(1.0, 3.0), order_max=4))
    h = 1e-3
    c = np.array([-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12])
    offs = np.arange(-2, 3) * h
    pts = [(0.3, 0.2), (-0.4, 0.1), (0.2, -0.5)]
    for md in modes:
        f = lambda x_, y_: evaluate_mode(md, np.hypot(x_, y_), np.arctan2(y_, x_))
        for x, y in pts:
            val = f(x, y)
            if abs(val) < 1e-2:
                continue
            lap = (c @ f(x + offs, y) + c @ f(x, y + offs)) / h ** 2
            assert abs(lap + (n * md.k) ** 2 * val) <= 1e-6 * (n * md.k) ** 2 * abs(val)
