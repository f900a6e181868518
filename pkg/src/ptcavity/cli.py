"""Config-driven command line front end.

Usage: ``ptcavity --config run.cfg [--out DIR] [--threads N] [--check-determinism]``.
The config grammar is documented in README.md.
"""
from __future__ import annotations

import argparse
import configparser
import filecmp
import logging
import math
import os
import re
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import analysis
from .basis import BasisSpec, Geometry, enumerate_basis
from .coupling import assemble, write_matrix_csv
from .io import emit_field, emit_trace, write_json
from .profiles import PRESETS, GainLossProfile, Piece, ProfileError, discover_group, preset
from .symmetry import GroupError, generate, parse_element
from .sweep import sweep

log = logging.getLogger("ptcavity")

ANALYSES = ("sweep", "thresholds", "group_report", "selection_rules", "dark_states", "cubic_discriminant")
KNOWN = {
    "run": {"geometry", "n", "r", "analyses", "threads"},
    "basis": {"order_max", "k_window", "eta_max"},
    "profile": {"preset", "pieces", "group", "phase_element"},
    "tau": {"start", "stop", "steps"},
    "analysis": {"track", "cubic_modes", "cubic_k", "cubic_ratio", "cubic_scale",
                 "field_branch", "field_tau", "field_grid", "field_size", "field_radius"},
    "output": {"dir", "trace", "matrices", "field"},
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    path: str
    geometry: Geometry
    n: float
    R: float
    basis: BasisSpec
    profile: GainLossProfile
    declared_group: Optional[list]
    phase_element: Optional[str]
    tau: np.ndarray
    analyses: Tuple[str, ...]
    threads: int
    out_dir: str
    write_trace: bool
    write_matrices: bool
    write_field: bool
    options: Dict[str, str] = field(default_factory=dict)


def _line_index(text):
    """(section, key) -> 1-based line number."""
    index, section = {}, None
    for no, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip().lower()
            index[(section, None)] = no
            continue
        m = re.match(r"([A-Za-z_][\w.]*)\s*[=:]", s)
        if m and section is not None and not line[:1].isspace():
            index[(section, m.group(1).lower())] = no
    return index


class _Reader:
    def __init__(self, path, text):
        self.path = path
        self.lines = _line_index(text)
        self.cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            self.cp.read_string(text, source=path)
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None

    def fail(self, section, key, message):
        no = self.lines.get((section, key)) or self.lines.get((section, None))
        where = f"{self.path}:{no}" if no else self.path
        name = f"[{section}] {key}" if key else f"[{section}]"
        raise ConfigError(f"{where}: {name}: {message}")

    def has(self, section, key):
        return self.cp.has_option(section, key)

    def get(self, section, key, default=None):
        if self.cp.has_option(section, key):
            return self.cp.get(section, key).strip()
        return default

    def number(self, section, key, default, kind=float, check=None, what=""):
        raw = self.get(section, key)
        if raw is None:
            return default
        try:
            val = kind(raw)
        except ValueError:
            self.fail(section, key, f"expected {kind.__name__}, got {raw!r}")
        if check is not None and not check(val):
            self.fail(section, key, f"{raw} is not {what}")
        return val

    def numbers(self, section, key, count=None):
        raw = self.get(section, key)
        if raw is None:
            return None
        try:
            vals = [float(x) for x in re.split(r"[,\s]+", raw) if x]
        except ValueError:
            self.fail(section, key, f"expected numbers, got {raw!r}")
        if count is not None and len(vals) != count:
            self.fail(section, key, f"expected {count} numbers, got {len(vals)}")
        return vals

    def words(self, section, key):
        raw = self.get(section, key)
        if raw is None:
            return None
        return [w.strip() for w in raw.split(",") if w.strip()]

    def boolean(self, section, key, default):
        if not self.has(section, key):
            return default
        try:
            return self.cp.getboolean(section, key)
        except ValueError:
            self.fail(section, key, f"expected a boolean, got {self.get(section, key)!r}")


def _parse_pieces(rd: _Reader):
    raw = rd.get("profile", "pieces")
    pieces = []
    for chunk in re.split(r"[;\n]", raw):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            vals = [float(x) for x in chunk.split()]
        except ValueError:
            rd.fail("profile", "pieces", f"non-numeric piece {chunk!r}")
        if len(vals) not in (6, 8):
            rd.fail("profile", "pieces",
                    f"piece {chunk!r} needs 'phi_a phi_b r_a r_b c0 c1 [theta_a theta_b]'")
        pa, pb, ra, rb, c0, c1 = vals[:6]
        theta = (vals[6] * math.pi, vals[7] * math.pi) if len(vals) == 8 else (0.0, math.pi)
        try:
            pieces.append(Piece((pa * math.pi, pb * math.pi), (ra, rb), c1 / math.pi, c0, theta))
        except ProfileError as exc:
            rd.fail("profile", "pieces", str(exc))
    if not pieces:
        rd.fail("profile", "pieces", "no pieces given")
    return GainLossProfile(tuple(pieces), "custom")


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    rd = _Reader(path, text)

    for section in rd.cp.sections():
        if section.lower() not in KNOWN:
            rd.fail(section, None, f"unknown section; expected one of {', '.join(KNOWN)}")
        for key in rd.cp.options(section):
            if key not in KNOWN[section.lower()]:
                rd.fail(section, key, "unknown key")

    geo = rd.get("run", "geometry", "disk").lower()
    try:
        geometry = Geometry(geo)
    except ValueError:
        rd.fail("run", "geometry", f"expected disk or sphere, got {geo!r}")
    n = rd.number("run", "n", 3.3, check=lambda v: v > 1.0, what="a refractive index > 1")
    R = rd.number("run", "r", 1.0, check=lambda v: v > 0.0, what="a positive radius")
    threads = rd.number("run", "threads", 1, int, lambda v: v >= 1, "a positive thread count")
    analyses = tuple(rd.words("run", "analyses") or ("sweep", "thresholds"))
    for a in analyses:
        if a not in ANALYSES:
            rd.fail("run", "analyses", f"unknown analysis {a!r}; known: {', '.join(ANALYSES)}")

    order_max = rd.number("basis", "order_max", 20, int, lambda v: v >= 0, "non-negative")
    window = rd.numbers("basis", "k_window", 2)
    eta_max = rd.number("basis", "eta_max", None, int, lambda v: v >= 1, "a positive integer")
    if window is None and eta_max is None:
        rd.fail("basis", None, "give k_window or eta_max")
    if window is not None and not window[0] <= window[1]:
        rd.fail("basis", "k_window", "lower bound exceeds upper bound")
    spec = BasisSpec(geometry, n, R, order_max, tuple(window) if window else None, eta_max)

    if rd.has("profile", "preset") == rd.has("profile", "pieces"):
        rd.fail("profile", None, "give exactly one of preset or pieces")
    if rd.has("profile", "preset"):
        name = rd.get("profile", "preset")
        params = {}
        m = re.fullmatch(r"(\w+)\s*(?:\((.*)\))?", name)
        if not m or m.group(1) not in PRESETS:
            rd.fail("profile", "preset", f"unknown preset {name!r}; known: {', '.join(sorted(PRESETS))}")
        pname, args = m.group(1), m.group(2)
        if args:
            for part in args.split(","):
                k_, _, v_ = part.partition("=")
                try:
                    params[k_.strip()] = int(v_) if k_.strip() == "v" else float(v_)
                except ValueError:
                    rd.fail("profile", "preset", f"bad parameter {part!r}")
        try:
            profile = preset(pname, **params)
        except (TypeError, ProfileError) as exc:
            rd.fail("profile", "preset", str(exc))
    else:
        profile = _parse_pieces(rd)
        try:
            profile.check_tiling()
        except ProfileError as exc:
            rd.fail("profile", "pieces", str(exc))
    if geometry is Geometry.DISK and profile.theta_dependent:
        rd.fail("profile", "preset" if rd.has("profile", "preset") else "pieces",
                "theta-dependent profile is inconsistent with disk geometry")

    declared = None
    if rd.has("profile", "group"):
        try:
            declared = [parse_element(w) for w in rd.words("profile", "group")]
        except ValueError as exc:
            rd.fail("profile", "group", str(exc))
    phase_element = rd.get("profile", "phase_element")
    if phase_element is not None:
        try:
            parse_element(phase_element)
        except ValueError as exc:
            rd.fail("profile", "phase_element", str(exc))

    start = rd.number("tau", "start", 0.0, check=lambda v: v == 0.0, what="0 (sweeps start at tau = 0)")
    stop = rd.number("tau", "stop", 0.5, check=lambda v: v > 0.0, what="positive")
    steps = rd.number("tau", "steps", 201, int, lambda v: v >= 2, "at least 2")
    tau = np.linspace(start, stop, steps)

    options = {k: v.strip() for k, v in rd.cp.items("analysis")} if rd.cp.has_section("analysis") else {}
    if "cubic_discriminant" in analyses and "cubic_modes" not in options:
        rd.fail("analysis", None, "cubic_discriminant needs cubic_modes = e, o, 0 labels")
    for key in ("cubic_ratio", "cubic_scale", "field_tau", "field_radius"):
        if key in options:
            rd.number("analysis", key, None)
    if "cubic_k" in options:
        rd.numbers("analysis", "cubic_k", 2)
    if "field_size" in options:
        rd.number("analysis", "field_size", None, int, lambda v: v >= 3, "at least 3")

    out_dir = rd.get("output", "dir", "out")
    if not os.path.isabs(out_dir):
        out_dir = os.path.join(os.path.dirname(os.path.abspath(path)), out_dir)
    cfg = RunConfig(path, geometry, n, R, spec, profile, declared, phase_element, tau, analyses,
                    threads, out_dir, rd.boolean("output", "trace", True),
                    rd.boolean("output", "matrices", False), rd.boolean("output", "field", False),
                    options)
    cfg._reader = rd
    return cfg


def _labels(cfg, key, basis_labels):
    rd = cfg._reader
    groups = []
    raw = cfg.options.get(key)
    if raw is None:
        return groups
    for chunk in raw.split(";"):
        labs = [w.strip() for w in chunk.split(",") if w.strip()]
        for lab in labs:
            if lab not in basis_labels:
                rd.fail("analysis", key, f"mode {lab!r} is not in the basis")
        groups.append(labs)
    return groups


def run(cfg: RunConfig, out_dir: Optional[str] = None, threads: Optional[int] = None) -> List[str]:
    """Execute every requested analysis; returns the written file paths."""
    out = out_dir or cfg.out_dir
    try:
        os.makedirs(out, exist_ok=True)
        probe = os.path.join(out, ".write-test")
        open(probe, "w").close()
        os.remove(probe)
    except OSError as exc:
        raise ConfigError(f"{cfg.path}: output directory {out!r} is not writable: {exc.strerror}") from None
    threads = threads or cfg.threads
    written = []

    basis = enumerate_basis(cfg.basis)
    if not basis:
        cfg._reader.fail("basis", "k_window", "the basis is empty")
    system = assemble(basis, cfg.profile, cfg.n)
    labels = system.labels()
    log.info("basis: %d modes; profile %s", len(basis), cfg.profile.name)

    try:
        if cfg.declared_group is not None:
            group, discovered = generate(cfg.declared_group), False
        else:
            group, discovered = discover_group(cfg.profile), True
    except (GroupError, ProfileError) as exc:
        cfg._reader.fail("profile", "group" if cfg.declared_group else None, str(exc))
    phase_el = parse_element(cfg.phase_element) if cfg.phase_element else None
    if phase_el is None:
        t_els = sorted((e for e in group if e.t), key=lambda e: (e != parse_element("PT"),
                                                                 e.kind.value, e.turns))
        phase_el = t_els[0] if t_els else None

    def path(name):
        p = os.path.join(out, name)
        written.append(p)
        return p

    if cfg.write_matrices:
        write_matrix_csv(path("G.csv"), system, "G")
        write_matrix_csv(path("E.csv"), system, "E")

    if "group_report" in cfg.analyses:
        write_json(path("group_report.json"), analysis.group_report(group, cfg.profile.name, discovered))
    if "selection_rules" in cfg.analyses:
        rep = analysis.selection_report(system, group)
        rep["group"] = group.names()
        write_json(path("selection_rules.json"), rep)

    trace = None
    need_trace = {"sweep", "thresholds"} & set(cfg.analyses) or cfg.write_field
    if need_trace:
        trace = sweep(system, cfg.tau, threads=threads, phase_element=phase_el,
                      keep_vectors=cfg.write_field)
        if cfg.write_trace and "sweep" in cfg.analyses:
            emit_trace(trace, path("trace.csv"))
    if "thresholds" in cfg.analyses:
        tracked = _labels(cfg, "track", labels)
        rep = analysis.threshold_report(system, trace, tracked)
        rep["profile"] = cfg.profile.name
        write_json(path("thresholds.json"), rep)
    if "dark_states" in cfg.analyses:
        rep = analysis.dark_state_report(system, cfg.tau)
        write_json(path("dark_states.json"), rep)
    if "cubic_discriminant" in cfg.analyses:
        modes = _labels(cfg, "cubic_modes", labels)[0]
        if len(modes) != 3:
            cfg._reader.fail("analysis", "cubic_modes", "expected three labels (e, o, 0)")
        k_over = [float(x) for x in re.split(r"[,\s]+", cfg.options["cubic_k"]) if x] \
            if "cubic_k" in cfg.options else None
        ratio = float(cfg.options["cubic_ratio"]) if "cubic_ratio" in cfg.options else None
        scale = float(cfg.options.get("cubic_scale", 1.0))
        rep = analysis.cubic_report(system, modes, cfg.tau, k_over, ratio, scale)
        write_json(path("cubic_discriminant.json"), rep)
    if cfg.write_field:
        tau_f = float(cfg.options.get("field_tau", cfg.tau[-1]))
        t = int(np.argmin(np.abs(trace.tau - tau_f)))
        grid = cfg.options.get("field_grid", "polar" if cfg.geometry is Geometry.DISK else "sphere")
        size = int(cfg.options.get("field_size", 101))
        radius = float(cfg.options["field_radius"]) if "field_radius" in cfg.options else None
        branches = _labels(cfg, "field_branch", labels)
        for lab in (branches[0] if branches else labels):
            b = labels.index(lab)
            emit_field(path(f"field_{lab}.csv"), basis, trace.vectors[t, :, b], grid, size, radius)
    return written


def _determinism_check(cfg, threads) -> bool:
    with tempfile.TemporaryDirectory() as a, tempfile.TemporaryDirectory() as b:
        fa = run(cfg, a, threads)
        run(cfg, b, threads)
        names = [os.path.basename(p) for p in fa]
        match, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
        for name in mismatch + errors:
            log.error("non-deterministic artifact: %s", name)
        return not (mismatch or errors)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="ptcavity", description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True, help="run configuration file")
    ap.add_argument("--out", help="output directory (overrides [output] dir)")
    ap.add_argument("--threads", type=int, help="worker threads for the tau sweep")
    ap.add_argument("--check-determinism", action="store_true",
                    help="run twice and compare every artifact byte for byte")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
        if args.check_determinism:
            ok = _determinism_check(cfg, args.threads)
            print("deterministic" if ok else "NOT deterministic")
            if not ok:
                return 1
        files = run(cfg, args.out, args.threads)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
