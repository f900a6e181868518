"""tau sweeps with branch tracking and transition detection."""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .coupling import CouplingSystem
from .spectrum import Phase, SpectrumPoint, classify_phase, solve_at
from .symmetry import SymmetryElement

__all__ = [
    "EventKind",
    "TransitionEvent",
    "SpectrumTrace",
    "sweep",
    "match_points",
    "VECTOR_WEIGHT",
    "DETECTION_RTOL",
    "MAX_BISECTION_DEPTH",
]

VECTOR_WEIGHT = 0.5
DETECTION_RTOL = 1e-9
MAX_BISECTION_DEPTH = 20
AMBIGUITY_RTOL = 1e-9
REFINE_ITERATIONS = 48


class EventKind(enum.Enum):
    SYMMETRY_BREAK = "SymmetryBreak"
    SYMMETRY_RESTORE = "SymmetryRestore"
    UNRESOLVED_CROSSING = "UnresolvedCrossing"


@dataclass(frozen=True)
class TransitionEvent:
    kind: EventKind
    tau_star: float
    branches: Tuple[int, ...]
    tau_grid: float            # grid point at which the change was first seen

    def as_dict(self, labels=None):
        out = {
            "kind": self.kind.value,
            "tau_star": self.tau_star,
            "tau_grid": self.tau_grid,
            "branches": list(self.branches),
        }
        if labels is not None:
            out["labels"] = [labels[b] for b in self.branches]
        return out


@dataclass
class SpectrumTrace:
    tau: np.ndarray                      # (T,)
    k: np.ndarray                        # (T, B) complex, column b is branch b
    labels: List[str]                    # branch b starts on basis mode b
    events: List[TransitionEvent] = field(default_factory=list)
    phases: Optional[np.ndarray] = None  # (T, B) of Phase values
    vectors: Optional[np.ndarray] = None  # (T, N, B)
    tolerance: float = 0.0

    @property
    def n_branches(self):
        return self.k.shape[1]

    def branch(self, b):
        return self.k[:, b]

    def branch_index(self, label):
        return self.labels.index(label)

    def broken(self):
        return np.abs(self.k.imag) > self.tolerance

    def max_step(self):
        if len(self.tau) < 2:
            return 0.0
        return float(np.max(np.abs(np.diff(self.k, axis=0))))

    def events_of(self, kind=EventKind.SYMMETRY_BREAK):
        return [e for e in self.events if e.kind is kind]

    def first_break(self, branches=None, tau_min=0.0):
        """Earliest SymmetryBreak (optionally involving one of ``branches``)
        whose refined threshold exceeds ``tau_min``."""
        for e in self.events_of(EventKind.SYMMETRY_BREAK):
            if e.tau_star <= tau_min:
                continue
            if branches is None or set(branches) & set(e.branches):
                return e
        return None


# ---------------------------------------------------------------- matching

def _cost(prev: SpectrumPoint, new: SpectrumPoint):
    dk = np.abs(prev.k[:, None] - new.k[None, :])
    ov = np.abs(prev.vectors.conj().T @ new.vectors)
    return dk + VECTOR_WEIGHT * (1.0 - ov)


def _ambiguous(cost, cols, prev: SpectrumPoint, new: SpectrumPoint, eps):
    """True if swapping the targets of some pair of branches costs (almost)
    nothing, ignoring pairs whose swap is physically immaterial."""
    A = cost[:, cols]
    d = np.diag(A)
    D = A + A.T - d[:, None] - d[None, :]
    np.fill_diagonal(D, np.inf)
    kp, kn = prev.k, new.k[cols]
    degenerate_before = np.abs(kp[:, None] - kp[None, :]) <= eps
    same_after = np.abs(kn[:, None] - kn[None, :]) <= eps
    partners = (np.abs(kn[:, None] - kn[None, :].conj()) <= eps) & (np.abs(kn.imag)[:, None] > eps)
    D = np.where(degenerate_before | same_after | partners, np.inf, D)
    return bool(np.any(D < eps))


def match_points(prev: SpectrumPoint, new: SpectrumPoint, eps: float) -> Tuple[np.ndarray, bool]:
    """cols such that branch b of ``prev`` continues as column cols[b] of ``new``."""
    cost = _cost(prev, new)
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(len(rows), dtype=int)
    perm[rows] = cols
    return perm, _ambiguous(cost, perm, prev, new, eps)


def _reorder(point: SpectrumPoint, perm):
    return SpectrumPoint(point.tau, point.k[perm], point.vectors[:, perm])


def _match_refined(system, prev, new, eps, depth, unresolved):
    perm, amb = match_points(prev, new, eps)
    if not amb:
        return perm
    if depth >= MAX_BISECTION_DEPTH:
        unresolved.append((prev.tau, new.tau))
        return perm
    mid = solve_at(system, 0.5 * (prev.tau + new.tau))
    p1 = _match_refined(system, prev, mid, eps, depth + 1, unresolved)
    mid = _reorder(mid, p1)
    return _match_refined(system, mid, new, eps, depth + 1, unresolved)


# ---------------------------------------------------------------- events

def _partner(k_row, b, tol):
    target = k_row[b].conjugate()
    d = np.abs(k_row - target)
    d[b] = np.inf
    j = int(np.argmin(d))
    return j


def _refine_threshold(system, lo, hi, re_lo, re_hi, tol, becomes_broken):
    """Bisect (lo, hi] for the tau where an eigenvalue with real part inside
    [re_lo, re_hi] changes from real to complex (or back)."""
    def broken_at(t):
        k = solve_at(system, t).k
        sel = (k.real >= re_lo) & (k.real <= re_hi)
        return bool(np.any(np.abs(k[sel].imag) > tol))

    for _ in range(REFINE_ITERATIONS):
        if hi - lo <= 1e-14 * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if broken_at(mid) == becomes_broken:
            hi = mid
        else:
            lo = mid
    return hi


def _window(k_prev_row, k_now_row, pair):
    res = np.concatenate([k_prev_row.real, k_now_row.real])
    lo = min(res[[p for p in pair] + [p + len(k_prev_row) for p in pair]])
    hi = max(res[[p for p in pair] + [p + len(k_prev_row) for p in pair]])
    others = np.delete(k_now_row.real, list(pair))
    if len(others):
        gap = np.min(np.abs(others - 0.5 * (lo + hi)))
        margin = 0.25 * max(gap - 0.5 * (hi - lo), 0.0)
    else:
        margin = 1.0
    return lo - margin, hi + margin


def _detect(system, tau, K, tol, refine):
    broken = np.abs(K.imag) > tol
    events = []
    for t in range(1, len(tau)):
        changed = np.flatnonzero(broken[t] != broken[t - 1])
        seen = set()
        for b in changed:
            if b in seen:
                continue
            now_broken = bool(broken[t, b])
            row = K[t] if now_broken else K[t - 1]
            p = _partner(row, b, tol)
            pair = (b, p) if broken[t, p] != broken[t - 1, p] else (b,)
            seen.update(pair)
            kind = EventKind.SYMMETRY_BREAK if now_broken else EventKind.SYMMETRY_RESTORE
            tau_star = float(tau[t])
            if refine:
                lo, hi = _window(K[t - 1], K[t], pair)
                tau_star = _refine_threshold(system, float(tau[t - 1]), float(tau[t]), lo, hi, tol,
                                             now_broken)
            events.append(TransitionEvent(kind, tau_star, tuple(sorted(int(x) for x in pair)),
                                          float(tau[t])))
    return events


# ---------------------------------------------------------------- sweep

def sweep(system: CouplingSystem, tau_grid: Sequence[float], threads: int = 1,
          refine: bool = True, keep_vectors: bool = False,
          phase_element: Optional[SymmetryElement] = None, classify: bool = True) -> SpectrumTrace:
    """Solve on every grid point, link eigenvalues into branches, and extract
    symmetry-breaking and restoring events.

    Branch b starts on basis mode b at tau = 0.  Consecutive points are linked
    by a minimum-cost assignment on |dk| + 0.5 (1 - |<a, a'>|); near-ties are
    resolved by bisecting the step.  The detection tolerance is 1e-9 times the
    mean basis frequency.
    """
    tau = np.asarray(tau_grid, dtype=float)
    if tau.ndim != 1 or len(tau) == 0:
        raise ValueError("tau grid must be a non-empty 1-D sequence")
    if tau[0] != 0.0:
        raise ValueError("tau grid must start at 0")
    if np.any(np.diff(tau) <= 0):
        raise ValueError("tau grid must be strictly increasing")
    N = system.size
    kbar = float(np.mean(system.k)) if N else 1.0
    tol = DETECTION_RTOL * kbar
    eps = AMBIGUITY_RTOL * kbar

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(lambda t: solve_at(system, float(t)), tau))
    else:
        points = [solve_at(system, float(t)) for t in tau]

    T = len(tau)
    K = np.empty((T, N), dtype=complex)
    V = np.empty((T, N, N), dtype=complex) if keep_vectors or classify else None
    unresolved = []
    cur = points[0]
    K[0] = cur.k
    if V is not None:
        V[0] = cur.vectors
    for t in range(1, T):
        perm = _match_refined(system, cur, points[t], eps, 0, unresolved)
        cur = _reorder(points[t], perm)
        K[t] = cur.k
        if V is not None:
            V[t] = cur.vectors

    events = _detect(system, tau, K, tol, refine)
    for lo, hi in unresolved:
        events.append(TransitionEvent(EventKind.UNRESOLVED_CROSSING, hi, (), hi))
    events.sort(key=lambda e: (e.tau_star, e.kind.value, e.branches))

    phases = None
    if classify:
        phases = np.empty((T, N), dtype=object)
        for t in range(T):
            pt = SpectrumPoint(float(tau[t]), K[t], V[t])
            phases[t] = classify_phase(pt, system.basis, phase_element, tol)

    return SpectrumTrace(tau, K, system.labels(), events, phases,
                         V if keep_vectors else None, tol)
