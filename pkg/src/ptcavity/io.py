"""CSV/JSON artifacts: traces, reports and intensity grids."""
from __future__ import annotations

import csv
import json
import math
from typing import Optional, Sequence

import numpy as np

from .basis import Geometry, evaluate_mode
from .spectrum import Phase
from .sweep import SpectrumTrace

__all__ = [
    "SCHEMA_VERSION",
    "TRACE_HEADER",
    "FIELD_HEADERS",
    "emit_trace",
    "read_trace",
    "write_json",
    "field_values",
    "emit_field",
    "read_field",
]

SCHEMA_VERSION = "1.0"
TRACE_HEADER = ("tau", "branch_id", "re_k", "im_k", "phase")
FIELD_HEADERS = {
    "cartesian": ("x", "y", "intensity"),
    "polar": ("r", "phi", "intensity"),
    "sphere": ("theta", "phi", "intensity"),
}


def _num(x) -> str:
    return format(float(x), ".17g")


def emit_trace(trace: SpectrumTrace, path) -> None:
    """One row per (tau, branch); branch_id is the label of the basis mode
    the branch starts from."""
    phases = trace.phases
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for t, tau in enumerate(trace.tau):
            for b, lab in enumerate(trace.labels):
                k = trace.k[t, b]
                if phases is not None:
                    ph = phases[t, b].value
                else:
                    ph = "broken" if abs(k.imag) > trace.tolerance else "sym"
                w.writerow((_num(tau), lab, _num(k.real), _num(k.imag), ph))


def read_trace(path) -> SpectrumTrace:
    """Parse a CSV written by :func:`emit_trace` (events are not stored)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != TRACE_HEADER:
        raise ValueError(f"{path}: unexpected header {rows[0]}")
    body = rows[1:]
    labels = []
    for r in body:
        if r[1] in labels:
            break
        labels.append(r[1])
    B = len(labels)
    if B == 0 or len(body) % B:
        raise ValueError(f"{path}: ragged trace")
    T = len(body) // B
    tau = np.array([float(body[t * B][0]) for t in range(T)])
    k = np.array([[complex(float(body[t * B + b][2]), float(body[t * B + b][3])) for b in range(B)]
                  for t in range(T)])
    phases = np.array([[Phase(body[t * B + b][4]) for b in range(B)] for t in range(T)], dtype=object)
    return SpectrumTrace(tau, k, labels, [], phases)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path, payload: dict) -> None:
    data = {"schema_version": SCHEMA_VERSION}
    data.update(payload)
    with open(path, "w") as fh:
        json.dump(_clean(data), fh, indent=2, sort_keys=False)
        fh.write("\n")


# ---------------------------------------------------------------- fields

def field_values(basis: Sequence, coeffs, grid: str = "polar", size: int = 101,
                 radius: Optional[float] = None):
    """Sample |sum_j a_j psi_j|^2 on a grid, normalized to a maximum of 1.

    Disk grids: ``cartesian`` (size x size points on the bounding square,
    keeping those inside the disk) or ``polar`` (size radii on [0, R] times
    2*(size-1) angles on [-pi, pi)).  Sphere grids sample a spherical surface
    of radius ``radius`` (default 0.6 R) over theta and phi.
    Returns (coords_a, coords_b, intensity) as flat arrays.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    if len(coeffs) != len(basis):
        raise ValueError("coefficient vector does not match the basis")
    R = basis[0].radius
    geometry = basis[0].geometry
    n_phi = 2 * (size - 1)
    phi_1d = -math.pi + 2 * math.pi * np.arange(n_phi) / n_phi
    if geometry is Geometry.DISK:
        if grid == "cartesian":
            x1 = np.linspace(-R, R, size)
            X, Y = np.meshgrid(x1, x1, indexing="ij")
            inside = X ** 2 + Y ** 2 <= R ** 2 * (1 + 1e-12)
            a, b = X[inside], Y[inside]
            r, phi = np.minimum(np.hypot(a, b), R), np.arctan2(b, a)
        elif grid == "polar":
            r1 = np.linspace(0.0, R, size)
            Rg, P = np.meshgrid(r1, phi_1d, indexing="ij")
            a, b = Rg.ravel(), P.ravel()
            r, phi = a, b
        else:
            raise ValueError(f"unknown disk grid {grid!r}")
        psi = sum(c * evaluate_mode(md, r, phi) for c, md in zip(coeffs, basis) if c != 0)
    else:
        if grid not in ("sphere", "polar"):
            raise ValueError(f"unknown sphere grid {grid!r}")
        rs = (0.6 if radius is None else radius) * R
        th1 = math.pi * (np.arange(size) + 0.5) / size
        T, P = np.meshgrid(th1, phi_1d, indexing="ij")
        a, b = T.ravel(), P.ravel()
        psi = sum(c * evaluate_mode(md, rs, a, b) for c, md in zip(coeffs, basis) if c != 0)
    inten = np.abs(np.asarray(psi, dtype=complex)) ** 2 * np.ones_like(a)
    peak = float(np.max(inten)) if inten.size else 0.0
    if peak > 0:
        inten = inten / peak
    return a, b, inten


def emit_field(path, basis, coeffs, grid: str = "polar", size: int = 101, radius=None) -> None:
    a, b, inten = field_values(basis, coeffs, grid, size, radius)
    key = "sphere" if basis[0].geometry is Geometry.SPHERE else grid
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIELD_HEADERS[key])
        for row in zip(a, b, inten):
            w.writerow(tuple(_num(v) for v in row))


def read_field(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    return tuple(rows[0]), data
