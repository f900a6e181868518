"""Non-Hermitian eigenproblem (1 + i tau~ G) a = k~^-2 E a and its closed-form
few-mode reductions.

tau~ = tau / n^2 throughout.  Eigenvalues are reported as k~ with Re k~ > 0.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from .basis import Geometry
from .coupling import CouplingSystem
from .symmetry import SymmetryElement, reflection

__all__ = [
    "SpectrumPoint",
    "EigensolverError",
    "solve_at",
    "k_from_lambda",
    "two_mode_eigenvalues",
    "threshold_estimate",
    "ThreeModeResult",
    "three_mode_block",
    "three_mode_matrix",
    "CubicResult",
    "quasi_degenerate_cubic",
    "cubic_discriminant",
    "restored_intervals",
    "Phase",
    "representation_matrix",
    "classify_phase",
]

RESIDUAL_TOL = 1e-10


class EigensolverError(RuntimeError):
    def __init__(self, message, matrix=None):
        super().__init__(message)
        self.matrix = matrix


@dataclass(frozen=True)
class SpectrumPoint:
    tau: float
    k: np.ndarray          # complex k~, one per column of ``vectors``
    vectors: np.ndarray    # unit-norm columns in the Hermitian basis

    def __len__(self):
        return len(self.k)


def k_from_lambda(lam):
    """k~ = lam^(-1/2) on the branch with positive real part."""
    k = 1.0 / np.sqrt(np.asarray(lam, dtype=complex))
    return np.where(k.real < 0, -k, k)


def solve_at(system: CouplingSystem, tau: float, dump_path: Optional[str] = None) -> SpectrumPoint:
    """All eigenpairs at ``tau`` from a dense complex eigensolve of
    E^-1 (1 + i tau~ G).  At tau = 0 the basis frequencies are returned
    exactly with identity eigenvectors."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    N = system.size
    if tau == 0.0 or N == 0:
        return SpectrumPoint(float(tau), system.k.astype(complex), np.eye(N, dtype=complex))
    A = np.eye(N) + 1j * system.tau_tilde(tau) * system.G
    M = A / (system.k ** 2)[:, None]
    try:
        lam, V = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:
        _dump(dump_path, M)
        raise EigensolverError(f"eigensolver failed at tau={tau}: {exc}", M) from exc
    V = V / np.linalg.norm(V, axis=0)
    res = np.linalg.norm(A @ V - (system.k ** 2)[:, None] * V * lam[None, :], axis=0)
    if np.max(res) > RESIDUAL_TOL:
        _dump(dump_path, M)
        raise EigensolverError(
            f"eigen-residual {np.max(res):.3e} exceeds {RESIDUAL_TOL:g} at tau={tau}", M
        )
    k = k_from_lambda(lam)
    order = np.lexsort((k.imag, k.real))
    return SpectrumPoint(float(tau), k[order], V[:, order])


def _dump(path, M):
    if path:
        np.save(path, M)


# ---------------------------------------------------------------- closed forms

def two_mode_eigenvalues(k_j: float, k_jp: float, G: float, tau: float, n: float = 3.3):
    """Both roots of the two-mode problem, ordered so that each one continues
    from k_j and k_jp respectively as G -> 0."""
    if k_j <= 0 or k_jp <= 0:
        raise ValueError("frequencies must be positive")
    t = tau / n ** 2
    a, b = k_j ** 2, k_jp ** 2
    root = np.sqrt(complex((a - b) ** 2 - 4 * a * b * (t * G) ** 2))
    lo = np.sqrt(2 * a * b / ((a + b) + root))
    hi = np.sqrt(2 * a * b / ((a + b) - root)) if abs((a + b) - root) > 0 else complex(math.inf)
    lo, hi = complex(lo), complex(hi)
    return (lo, hi) if k_j <= k_jp else (hi, lo)


def threshold_estimate(k_j: float, k_jp: float, G: float, n: Optional[float] = None) -> float:
    """Two-mode threshold |k_j^2 - k_jp^2| / (2 |G| k_j k_jp) in tau~, or in tau
    when ``n`` is given.  A vanishing coupling gives math.inf: the pair is
    protected at this order."""
    if G == 0.0:
        return math.inf
    t = abs(k_j ** 2 - k_jp ** 2) / (2 * abs(G) * k_j * k_jp)
    return t * n ** 2 if n is not None else t


@dataclass(frozen=True)
class ThreeModeResult:
    k: Tuple[complex, complex, complex]   # dark, then the conjugate pair
    dark_vector: np.ndarray               # in (e, o, 0) ordering
    im_slope: float                       # d Im k~ / d tau at tau = 0


def three_mode_matrix(G_eo: float, G_o0: float):
    """Coupling block in (e, o, 0) ordering, with the o-0 prefactor b = 1."""
    return np.array([[0.0, G_eo, 0.0], [G_eo, 0.0, G_o0], [0.0, G_o0, 0.0]])


def three_mode_block(k: float, G_eo: float, G_o0: float, tau: float = 0.0,
                     n: float = 3.3) -> ThreeModeResult:
    """Exact spectrum of a degenerate triple.  G has eigenvalues 0 and
    +-sqrt(G_eo^2 + G_o0^2), so k~ = k / sqrt(1 + i tau~ mu)."""
    g = math.hypot(G_eo, G_o0)
    t = tau / n ** 2
    ks = tuple(complex(k_from_lambda((1 + 1j * t * mu) / k ** 2)) for mu in (0.0, -g, g))
    if g == 0.0:
        dark = np.array([0.0, 0.0, 1.0])
    else:
        dark = np.array([G_o0, 0.0, -G_eo]) / g
        if dark[np.argmax(np.abs(dark))] < 0:
            dark = -dark
    return ThreeModeResult(ks, dark, 0.5 * k * g / n ** 2)


@dataclass(frozen=True)
class CubicResult:
    coefficients: np.ndarray   # highest power first, in lam = k_2^2 / k~^2
    discriminant: float
    k: np.ndarray              # the three k~ roots
    phase: str                 # "symmetric", "broken" or "degenerate"


def _shifted_coefficients(rho, t2, a, c):
    # the cubic in mu = lam - 1; every term below the leading two carries t2,
    # so nothing cancels near the tau = 0 double root
    d = rho - 1.0
    return np.array([-1.0, d, -t2 * (rho * c * c + a * a), t2 * a * a * d])


def _lambda_coefficients(rho, t2, a, c):
    # (1-x)^2 (rho-x) + t2 rho c^2 (1-x) + t2 a^2 (rho-x)
    return np.array([
        -1.0,
        2.0 + rho,
        -(1.0 + 2.0 * rho) - t2 * (rho * c * c + a * a),
        rho + t2 * rho * (c * c + a * a),
    ])


def cubic_discriminant(coeffs) -> float:
    a, b, c, d = coeffs
    return 18 * a * b * c * d - 4 * b ** 3 * d + b * b * c * c - 4 * a * c ** 3 - 27 * a * a * d * d


def _polish(coeffs, roots, steps=3):
    p, dp = np.poly1d(coeffs), np.poly1d(coeffs).deriv()
    out = np.array(roots, dtype=complex)
    for _ in range(steps):
        d = dp(out)
        with np.errstate(all="ignore"):
            step = out - p(out) / np.where(d != 0, d, 1)
            # near multiple roots Newton can wander; keep only improving steps
            ok = (d != 0) & np.isfinite(step) & (np.abs(p(step)) < np.abs(p(out)))
        out = np.where(ok, step, out)
    return out


def quasi_degenerate_cubic(k_2: float, k_0: float, G_eo: float, G_o0: float, tau: float,
                           n: float = 3.3, tol: float = 0.0) -> CubicResult:
    """Degenerate pair (k_2) coupled to one nearby non-degenerate mode (k_0).

    Scaling the third row by k_2^2/k_0^2 turns the problem into a cubic in
    lam = k_2^2 / k~^2 with real coefficients.  A positive discriminant means
    three real roots.  The discriminant and roots are computed in the shifted
    variable lam - 1, which leaves the discriminant unchanged.
    """
    rho = k_2 ** 2 / k_0 ** 2
    t2 = (tau / n ** 2) ** 2
    shifted = _shifted_coefficients(rho, t2, G_eo, G_o0)
    disc = cubic_discriminant(shifted)
    mu = _polish(shifted, np.roots(shifted))
    k = np.sort_complex(k_2 * k_from_lambda(1.0 + mu))
    if disc > tol:
        phase = "symmetric"
    elif disc < -tol:
        phase = "broken"
    else:
        phase = "degenerate"
    return CubicResult(_lambda_coefficients(rho, t2, G_eo, G_o0), float(disc), k, phase)


def _discriminant_polynomial(rho, G_eo, G_o0):
    """Discriminant divided by t, as a polynomial in t = tau~^2."""
    P = np.polynomial.Polynomial
    d = rho - 1.0
    a, b = P([-1.0]), P([d])
    c = P([0.0, -(rho * G_o0 ** 2 + G_eo ** 2)])
    dd = P([0.0, G_eo ** 2 * d])
    disc = 18 * a * b * c * dd - 4 * b ** 3 * dd + b * b * c * c - 4 * a * c ** 3 - 27 * a * a * dd * dd
    return P(disc.coef[1:])


def restored_intervals(k_2: float, k_0: float, G_eo: float, G_o0: float,
                       n: float = 3.3, tau_max: float = 1.0):
    """Sub-intervals of (0, tau_max] on which the cubic discriminant is positive.

    The discriminant is t times a polynomial in t = tau~^2, so its sign changes
    are located from that polynomial's real roots.
    """
    rho = k_2 ** 2 / k_0 ** 2
    q = _discriminant_polynomial(rho, G_eo, G_o0)
    t_max = (tau_max / n ** 2) ** 2
    roots = sorted(
        r.real for r in q.roots()
        if abs(r.imag) <= 1e-9 * max(1e-30, abs(r)) and 0.0 < r.real < t_max
    )
    edges = [0.0] + roots + [t_max]
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi > lo and q(0.5 * (lo + hi)) > 0:
            out.append((n ** 2 * math.sqrt(lo), n ** 2 * math.sqrt(hi)))
    return out


# ---------------------------------------------------------------- phase

class Phase(enum.Enum):
    SYMMETRIC = "sym"
    BROKEN = "broken"


def _angular_block_key(mode):
    if mode.geometry is Geometry.DISK:
        return (mode.eta, mode.m)
    return (mode.l, mode.eta, mode.mz)


def representation_matrix(basis: Sequence, element: SymmetryElement) -> np.ndarray:
    """Real matrix S of the spatial part s of ``element`` on the basis:
    psi_j(s^-1 x) = sum_i S_ij psi_i(x).  Only modes sharing radial and polar
    factors mix, so S is computed block by block from the azimuthal factors
    with a trapezoid rule that is exact for these trigonometric products."""
    from .basis import azimuthal_factor

    spatial = element.spatial
    inv = spatial.inverse()
    N = len(basis)
    S = np.zeros((N, N))
    groups = {}
    for i, md in enumerate(basis):
        groups.setdefault(_angular_block_key(md), []).append(i)
    for idx in groups.values():
        m = basis[idx[0]].azimuthal_order
        npts = 4 * m + 8
        phi = 2 * math.pi * np.arange(npts) / npts
        w = 2 * math.pi / npts
        base = np.array([azimuthal_factor(basis[i], phi) for i in idx])
        moved = np.array([azimuthal_factor(basis[i], inv.map_angle(phi)) for i in idx])
        S[np.ix_(idx, idx)] = w * base @ moved.T
    S[np.abs(S) < 1e-14] = 0.0
    return S


def classify_phase(point: SpectrumPoint, basis: Sequence, element: Optional[SymmetryElement] = None,
                   tol: Optional[float] = None, vec_tol: float = 1e-8, cluster_tol: float = 1e-7):
    """Symmetric/Broken per eigenvalue of ``point`` with respect to the
    antiunitary symmetry ``element`` (default PT).

    Symmetric requires |Im k~| <= tol and an eigenvector mapped onto itself:
    with A = s T, the vector S a* must lie in the span of a, up to a phase.
    For exactly degenerate eigenvalues the whole eigenspace is tested.
    """
    if element is None:
        element = reflection(Fraction(0), True)
    k = point.k
    if tol is None:
        tol = 1e-9 * float(np.mean(np.abs(k.real))) if len(k) else 0.0
    S = representation_matrix(basis, element)
    V = point.vectors
    img = S @ V.conj()
    out = []
    scale = max(1.0, float(np.max(np.abs(k)))) if len(k) else 1.0
    for j in range(len(k)):
        if abs(k[j].imag) > tol:
            out.append(Phase.BROKEN)
            continue
        cluster = np.flatnonzero(np.abs(k - k[j]) <= cluster_tol * scale)
        Q, _ = np.linalg.qr(V[:, cluster])
        r = img[:, j] - Q @ (Q.conj().T @ img[:, j])
        ok = np.linalg.norm(r) <= vec_tol * np.linalg.norm(V[:, j])
        out.append(Phase.SYMMETRIC if ok else Phase.BROKEN)
    return out
