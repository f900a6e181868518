import json
import math
import os
import textwrap
from pathlib import Path

import numpy as np
import pytest

from ptcavity import cli
from ptcavity.io import SCHEMA_VERSION, read_field, read_trace

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
GOLDEN = json.loads((Path(__file__).parent / "golden" / "schema.json").read_text())


def write_cfg(tmp_path, body, name="run.cfg"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(body).lstrip())
    return str(p)


def run_cli(*args):
    return cli.main([str(a) for a in args])


@pytest.fixture(scope="module")
def fig1(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig1")
    assert run_cli("--config", CONFIGS / "fig1.cfg", "--out", out) == 0
    return out


@pytest.fixture(scope="module")
def fig3(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig3")
    assert run_cli("--config", CONFIGS / "fig3.cfg", "--out", out) == 0
    return out


def load(path):
    return json.loads(Path(path).read_text())


def test_golden_headers_and_keys(fig1, fig3, tmp_path):
    assert (fig1 / "trace.csv").read_text().splitlines()[0].split(",") == GOLDEN["trace.csv"]
    assert list(load(fig1 / "group_report.json")) == GOLDEN["group_report.json"]
    sel = load(fig1 / "selection_rules.json")
    assert list(sel) == GOLDEN["selection_rules.json"]
    assert list(sel["pairs"][0]) == GOLDEN["selection_rules.pairs"]
    th = load(fig3 / "thresholds.json")
    assert list(th) == GOLDEN["thresholds.json"]
    assert list(th["events"][0]) == GOLDEN["thresholds.events"]
    assert read_field(fig1 / "field_2+.1.csv")[0] == tuple(GOLDEN["field.polar"])
    for p in fig1.glob("*.json"):
        assert load(p)["schema_version"] == SCHEMA_VERSION
    out = tmp_path / "s"
    assert run_cli("--config", CONFIGS / "sphere.cfg", "--out", out) == 0
    assert list(load(out / "dark_states.json")["triples"][0]) == GOLDEN["dark_states.triples"]
    out = tmp_path / "c"
    assert run_cli("--config", CONFIGS / "fig6.cfg", "--out", out) == 0
    assert list(load(out / "cubic_discriminant.json")) == GOLDEN["cubic_discriminant.json"]


def test_trace_rows(fig1):
    tr = read_trace(fig1 / "trace.csv")
    assert np.all(tr.k[0].imag == 0)
    for row in tr.k:
        assert abs(np.sum(row.imag)) < 1e-9
        for z in row[np.abs(row.imag) > 1e-9]:
            assert np.min(np.abs(row - z.conjugate())) < 1e-9


def test_trace_round_trip(linear_system, tmp_path):
    from ptcavity.io import emit_trace
    from ptcavity.sweep import sweep
    tr = sweep(linear_system, np.linspace(0, 0.3, 31))
    emit_trace(tr, tmp_path / "t.csv")
    back = read_trace(tmp_path / "t.csv")
    assert np.array_equal(back.tau, tr.tau)
    assert np.array_equal(back.k, tr.k)
    assert back.labels == tr.labels
    assert (back.phases == tr.phases).all()


def test_fig1_pairs_split_linearly(fig1):
    tr = read_trace(fig1 / "trace.csv")
    for lab in ("2+.1", "3+.1"):
        im = np.abs(tr.branch(tr.branch_index(lab)).imag)
        assert im[1] > 0
        sel = tr.tau <= 0.02
        fit = np.polyfit(tr.tau[sel], im[sel], 1)
        assert abs(fit[1]) < 1e-3 * fit[0] * 0.02


def test_fig3_thresholds(fig3):
    th = load(fig3 / "thresholds.json")
    row = next(r for r in th["tracked"] if r["labels"] == ["2-.2", "0.3"])
    assert abs(row["tau_full"] - 0.498) <= 0.05 * 0.498
    assert abs(row["tau_estimate"] - 0.483) <= 0.01 * 0.483


def test_half_disk_group_report(tmp_path):
    cfg = write_cfg(tmp_path, """
        [run]
        analyses = group_report
        [basis]
        k_window = 0, 2
        [profile]
        preset = half_disk
    """)
    assert run_cli("--config", cfg, "--out", tmp_path / "o") == 0
    rep = load(tmp_path / "o" / "group_report.json")
    assert set(rep["elements"]) == {"1", "PT", "P_{pi/2}", "R_pi T"}
    assert rep["family"] == "DT_4"


def test_determinism(tmp_path, capsys):
    cfg = CONFIGS / "fig3.cfg"
    assert run_cli("--config", cfg, "--out", tmp_path / "a", "--check-determinism") == 0
    assert "deterministic" in capsys.readouterr().out
    assert run_cli("--config", cfg, "--out", tmp_path / "b", "--threads", 3) == 0
    for f in os.listdir(tmp_path / "a"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


BASE = """
    [run]
    geometry = disk
    [basis]
    k_window = 0, 2
    [profile]
    preset = linear_gradient
"""


@pytest.mark.parametrize("body,line,needle", [
    (BASE.replace("linear_gradient", "no_such_profile"), 6, "unknown preset"),
    (BASE.replace("geometry = disk", "geometry = disk\nwobble = 3"), 3, "unknown key"),
    (BASE.replace("linear_gradient", "sphere_north_gradient"), 6, "disk geometry"),
    (BASE + "[tau]\nstart = 0.1\n", 8, "[tau] start"),
    (BASE.replace("k_window = 0, 2", "k_window = 2, 0"), 4, "lower bound"),
])
def test_line_anchored_errors(tmp_path, capsys, body, line, needle):
    cfg = write_cfg(tmp_path, body)
    assert run_cli("--config", cfg, "--out", tmp_path / "o") == 2
    err = capsys.readouterr().err
    assert f"{cfg}:{line}:" in err and needle in err


def test_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = write_cfg(tmp_path, BASE)
    assert run_cli("--config", cfg, "--out", blocker / "sub") == 2
    assert "not writable" in capsys.readouterr().err


def _polar(path):
    _, data = read_field(path)
    r = np.unique(data[:, 0])
    n_phi = len(data) // len(r)
    return r, data[:, 2].reshape(len(r), n_phi)


def test_field_mirror_pair(fig1):
    _, a = _polar(fig1 / "field_2+.1.csv")
    _, b = _polar(fig1 / "field_2-.1.csv")
    n_phi = a.shape[1]
    mirrored = b[:, (-np.arange(n_phi)) % n_phi]
    assert np.max(np.abs(a - mirrored)) < 1e-8
    assert np.max(np.abs(a - b)) > 1e-3


def test_field_dirichlet(fig1):
    r, a = _polar(fig1 / "field_2+.1.csv")
    assert np.max(a[-1]) < 1e-6 and abs(np.max(a) - 1) < 1e-15


def test_field_rt_pair(tmp_path):
    from ptcavity import profiles as pf
    from ptcavity.basis import BasisSpec, enumerate_basis
    from ptcavity.coupling import assemble
    from ptcavity.io import field_values
    from ptcavity.spectrum import solve_at
    basis = enumerate_basis(BasisSpec(k_window=(0.0, 3.5), order_max=10))
    pt = solve_at(assemble(basis, pf.rt_gradient()), 0.5)
    j = int(np.argmax(pt.k.imag))
    p = int(np.argmin(np.abs(pt.k - pt.k[j].conjugate())))
    assert pt.k[j].imag > 1e-6 and p != j
    size = 61
    n_phi = 2 * (size - 1)
    fa = field_values(basis, pt.vectors[:, j], "polar", size)[2].reshape(size, n_phi)
    fb = field_values(basis, pt.vectors[:, p], "polar", size)[2].reshape(size, n_phi)
    rotated = fb[:, (np.arange(n_phi) + n_phi // 2) % n_phi]
    assert np.max(np.abs(fa - rotated)) < 1e-8
    assert np.max(np.abs(fa - fb)) > 1e-3


def test_explicit_pieces_match_preset(tmp_path):
    cfg = write_cfg(tmp_path, """
        [run]
        analyses = group_report, selection_rules
        [basis]
        k_window = 0, 2.5
        [profile]
        pieces = -1 0 0 1 -1 0; 0 1 0 1 1 0
    """)
    assert run_cli("--config", cfg, "--out", tmp_path / "o") == 0
    rep = load(tmp_path / "o" / "group_report.json")
    assert set(rep["elements"]) == {"1", "PT", "P_{pi/2}", "R_pi T"}
    assert load(tmp_path / "o" / "selection_rules.json")["all_consistent"]


def test_overlapping_pieces_rejected(tmp_path, capsys):
    cfg = write_cfg(tmp_path, """
        [basis]
        k_window = 0, 2
        [profile]
        pieces = -1 0.5 0 1 -1 0; 0 1 0 1 1 0
    """)
    assert run_cli("--config", cfg) == 2
    assert f"{cfg}:4: [profile] pieces" in capsys.readouterr().err
