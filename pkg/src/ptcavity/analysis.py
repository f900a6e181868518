"""Report builders shared by the CLI and the tests."""
from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .basis import Geometry, Parity
from .coupling import CouplingSystem
from .spectrum import (
    quasi_degenerate_cubic,
    restored_intervals,
    solve_at,
    three_mode_block,
    threshold_estimate,
)
from .sweep import EventKind, SpectrumTrace
from .symmetry import (
    GroupError,
    SymmetryGroup,
    ct_group,
    dt_group,
    format_element,
    mt_group,
    parse_element,
    selection_rule,
    verify_half_t,
)

__all__ = [
    "degenerate_pairs",
    "identify_family",
    "group_report",
    "selection_report",
    "pair_estimates",
    "threshold_report",
    "sphere_triples",
    "dark_state_report",
    "cubic_report",
    "ZERO_COUPLING",
    "multiset_distance",
]

ZERO_COUPLING = 1e-12


def multiset_distance(a, b) -> float:
    """Largest |a_i - b_pi(i)| under the best one-to-one pairing pi."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(np.max(cost[r, c])) if len(r) else 0.0


def degenerate_pairs(basis):
    """(even index, odd index) for every cos/sin pair with azimuthal order >= 1."""
    where = {}
    for i, md in enumerate(basis):
        if md.parity is Parity.NONE:
            continue
        key = (md.multiplet, md.azimuthal_order)
        where.setdefault(key, {})[md.parity] = i
    out = []
    for key, d in where.items():
        if Parity.EVEN in d and Parity.ODD in d:
            out.append((d[Parity.EVEN], d[Parity.ODD]))
    return sorted(out, key=lambda p: (basis[p[0]].k, p))


def identify_family(group: SymmetryGroup, v_max: int = 24) -> Optional[str]:
    for v in range(2, v_max + 1, 2):
        if group == dt_group(v):
            return f"DT_{2 * v}"
    for v in range(1, v_max + 1):
        if group == ct_group(v):
            return f"CT_{2 * v}"
    for v in range(2, v_max + 1):
        if group == mt_group(v):
            return f"MT_{2 * v}"
    return None


def group_report(group: SymmetryGroup, profile_name=None, discovered=True) -> dict:
    names = group.names()
    return {
        "profile": profile_name,
        "source": "discovered" if discovered else "declared",
        "order": len(group),
        "elements": names,
        "antiunitary": [format_element(e) for e in group if e.t],
        "family": identify_family(group),
        "half_t": verify_half_t(group),
        "closed": group.is_closed(),
        "contains": {
            "PT": parse_element("PT") in group,
            "P_{pi/2}": parse_element("P_{pi/2}") in group,
            "R_pi T": parse_element("R_pi T") in group,
        },
    }


def selection_report(system: CouplingSystem, group: SymmetryGroup) -> dict:
    rows = []
    consistent = True
    for e, o in degenerate_pairs(system.basis):
        m = system.basis[e].azimuthal_order
        rule = selection_rule(group, m)
        g = float(system.G[e, o])
        agree = rule.forced_zero == (abs(g) < ZERO_COUPLING)
        consistent &= agree
        rows.append({
            "pair": [system.basis[e].label, system.basis[o].label],
            "m": m,
            "forced_zero": rule.forced_zero,
            "witness": format_element(rule.witness) if rule.witness is not None else None,
            "reason": rule.reason,
            "G_eo": g,
            "consistent": agree,
        })
    return {"pairs": rows, "all_consistent": bool(consistent)}


def pair_estimates(system: CouplingSystem, limit: Optional[int] = 20):
    """Two-mode threshold estimates for every coupled pair of modes from
    different multiplets, lowest first."""
    out = []
    basis = system.basis
    for i in range(system.size):
        for j in range(i + 1, system.size):
            if basis[i].multiplet == basis[j].multiplet and basis[i].k == basis[j].k:
                continue
            g = float(system.G[i, j])
            if abs(g) < ZERO_COUPLING:
                continue
            t = threshold_estimate(system.k[i], system.k[j], g, n=system.n)
            out.append({"pair": [basis[i].label, basis[j].label], "G": g, "tau_estimate": t})
    out.sort(key=lambda r: (r["tau_estimate"], r["pair"]))
    return out if limit is None else out[:limit]


def threshold_report(system: CouplingSystem, trace: SpectrumTrace,
                     tracked: Sequence[Sequence[str]] = ()) -> dict:
    labels = trace.labels
    first_step = float(trace.tau[1]) if len(trace.tau) > 1 else 0.0
    breaks = trace.events_of(EventKind.SYMMETRY_BREAK)
    thresholdless = [e for e in breaks if e.tau_grid <= first_step]
    finite = [e for e in breaks if e.tau_grid > first_step]
    rows = []
    for group in tracked:
        ids = [labels.index(l) for l in group]
        ev = next((e for e in breaks if set(ids) & set(e.branches)), None)
        row = {"labels": list(group), "tau_full": ev.tau_star if ev else None,
               "tau_grid": ev.tau_grid if ev else None}
        if len(ids) == 2:
            i, j = ids
            row["tau_estimate"] = threshold_estimate(system.k[i], system.k[j],
                                                     float(system.G[i, j]), n=system.n)
            row["G"] = float(system.G[i, j])
        rows.append(row)
    return {
        "n": system.n,
        "basis_size": system.size,
        "detection_tolerance": trace.tolerance,
        "tau_range": [float(trace.tau[0]), float(trace.tau[-1])],
        "tau_steps": len(trace.tau),
        "lowest_threshold": breaks[0].tau_star if breaks else None,
        "lowest_finite_threshold": finite[0].tau_star if finite else None,
        "lowest_finite_threshold_grid": finite[0].tau_grid if finite else None,
        "thresholdless_pairs": [[labels[b] for b in e.branches] for e in thresholdless],
        "tracked": rows,
        "estimates": pair_estimates(system),
        "events": [e.as_dict(labels) for e in trace.events],
    }


def sphere_triples(basis):
    """(e, o, 0) index triples of every l = 1 multiplet."""
    idx = {md.label: i for i, md in enumerate(basis)}
    out = []
    for md in basis:
        if md.geometry is Geometry.SPHERE and md.l == 1 and md.mz == 0:
            e, o = f"1.1+.{md.eta}", f"1.1-.{md.eta}"
            if e in idx and o in idx:
                out.append((idx[e], idx[o], idx[md.label]))
    return out


def dark_state_report(system: CouplingSystem, taus) -> dict:
    rows = []
    for e, o, z in sphere_triples(system.basis):
        sub = system.subsystem([e, o, z])
        G_eo, G_o0, G_e0 = float(sub.G[0, 1]), float(sub.G[1, 2]), float(sub.G[0, 2])
        k = float(sub.k[0])
        closed = three_mode_block(k, G_eo, G_o0, 0.0, system.n)
        worst_k, worst_v = 0.0, 0.0
        for t in taus:
            if t == 0.0:
                continue  # any vector of the triple is an eigenvector at tau = 0
            pt = solve_at(sub, float(t))
            j = int(np.argmin(np.abs(pt.k - k)))
            worst_k = max(worst_k, abs(pt.k[j] - k) / k)
            v = pt.vectors[:, j]
            v = v / v[np.argmax(np.abs(v))]
            d = closed.dark_vector / closed.dark_vector[np.argmax(np.abs(closed.dark_vector))]
            worst_v = max(worst_v, float(np.linalg.norm(v - d)))
        rows.append({
            "modes": [system.basis[i].label for i in (e, o, z)],
            "k": k,
            "G_eo": G_eo,
            "G_o0": G_o0,
            "G_e0": G_e0,
            "dark_vector": closed.dark_vector.tolist(),
            "im_slope": closed.im_slope,
            "max_relative_k_deviation": worst_k,
            "max_vector_deviation": worst_v,
        })
    return {"triples": rows}


def cubic_report(system: CouplingSystem, labels: Sequence[str], taus,
                 k_override=None, ratio: Optional[float] = None, scale: float = 1.0) -> dict:
    """Three-mode (e, o, 0) reduction for a degenerate pair and a nearby
    non-degenerate mode, checked against a dense solve of the same block."""
    e, o, z = (system.index_of(l) for l in labels)
    G_eo, G_o0 = float(system.G[e, o]), float(system.G[o, z])
    if ratio is not None:
        G_o0 = math.copysign(abs(ratio * G_eo), G_o0 if G_o0 != 0 else 1.0)
    G_eo, G_o0 = scale * G_eo, scale * G_o0
    k2, k0 = (float(system.k[e]), float(system.k[z])) if k_override is None else map(float, k_override)
    block = CouplingSystem(
        tuple(system.basis[i] for i in (e, o, z)),
        np.array([[0.0, G_eo, 0.0], [G_eo, 0.0, G_o0], [0.0, G_o0, 0.0]]),
        np.array([k2, k2, k0]),
        system.n,
    )
    rows, worst = [], 0.0
    for t in taus:
        cub = quasi_degenerate_cubic(k2, k0, G_eo, G_o0, float(t), system.n)
        diff = multiset_distance(cub.k, solve_at(block, float(t)).k)
        worst = max(worst, diff)
        rows.append({"tau": float(t), "discriminant": cub.discriminant, "phase": cub.phase,
                     "k": [[z_.real, z_.imag] for z_ in cub.k]})
    return {
        "modes": list(labels),
        "k_2": k2,
        "k_0": k0,
        "G_eo": G_eo,
        "G_o0": G_o0,
        "ratio": abs(G_o0 / G_eo) if G_eo else None,
        "restored_intervals": restored_intervals(k2, k0, G_eo, G_o0, system.n,
                                                 float(max(taus)) if len(taus) else 1.0),
        "max_dense_difference": worst,
        "points": rows,
    }
