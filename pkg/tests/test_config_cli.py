from __future__ import annotations

import json
from dataclasses import replace
from importlib import resources

import pytest

from gtdchem import cli
from gtdchem.config import load_config, parse_config
from gtdchem.errors import ConfigurationError

IDEAL_INI = (resources.files("gtdchem") / "data" / "ideal.ini").read_text()

IDEAL_JSON = {
    "reaction": {"temperature_K": 300, "volume_L": 20, "R_J_per_mol_K": 8.314, "model": "ideal",
                 "representation": "entropy_U"},
    "species": {
        "A": {"nu": -1, "n_init_mol": 1, "c": 1.5, "s0_J_per_mol_K": 1, "U0_J": 1, "V0_L": 1, "n0_mol": 1},
        "B": {"nu": 1, "n_init_mol": 0, "c": 1.5, "s0_J_per_mol_K": 2, "U0_J": 2, "V0_L": 1, "n0_mol": 1},
    },
    "scan": {"grid": 201},
    "equilibrium": {"tolerance": 1e-4},
    "geodesic": {"xi0": [0.01, 0.01, 0.01, 0.99, 0.99, 0.99],
                 "xi_dot0": [1e-4, 1e-3, 1e-2, -1e-4, -1e-3, -1e-2],
                 "e1_dot0": [0, 0, 0, 0, 0, 0], "tolerance": 1e-2},
    "curvature": {"grid": 5, "xi_min": 0.05, "xi_max": 0.95, "tolerance": 1e-6},
}


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _one_run_config(tmp_path, xi0=0.99, v=-1e-2):
    data = json.loads(json.dumps(IDEAL_JSON))
    data["geodesic"].update(xi0=[xi0], xi_dot0=[v], e1_dot0=[0])
    return _write(tmp_path, "one.json", json.dumps(data))


def test_ini_and_json_are_equivalent():
    a = parse_config(IDEAL_INI, "ideal.ini")
    b = parse_config(json.dumps(IDEAL_JSON), "ideal.json")
    assert replace(a, source="") == replace(b, source="")
    assert a.reaction.species[1].s0 == 2.0
    assert len(a.geodesic_runs) == 6 and a.geodesic_runs[4].xi_dot0 == -1e-3


def test_bundled_vdw_config():
    cfg = cli.read_config("bundled:vdw")
    assert cfg.model == "vdw" and cfg.representation == "massieu_beta"
    assert cfg.reaction.species[0].a == 506.0 and cfg.reaction.species[1].b == 0.05


@pytest.mark.parametrize("old,new,where", [
    ("volume_L = 20", "volume_L = -1", ":4: [reaction] volume_L: must be > 0"),
    ("c = 1.5", "c = abc", "[species.A] c"),
    ("model = ideal", "model = plasma", "[reaction] model"),
    ("U0_J = 1", "U0_J = 1\nfoo = 3", "[species.A] foo: unknown key"),
])
def test_ini_errors_name_line_and_field(old, new, where):
    with pytest.raises(ConfigurationError) as info:
        parse_config(IDEAL_INI.replace(old, new, 1), "cfg.ini")
    assert where in str(info.value)


def test_mismatched_geodesic_lists():
    text = IDEAL_INI.replace("xi_dot0 = 1e-4, 1e-3, 1e-2, -1e-4, -1e-3, -1e-2", "xi_dot0 = 1e-4")
    with pytest.raises(ConfigurationError, match="one entry per xi0"):
        parse_config(text, "cfg.ini")


def test_malformed_json_and_missing_file(tmp_path):
    with pytest.raises(ConfigurationError, match="malformed JSON"):
        parse_config("{bad", "x.json", "json")
    with pytest.raises(ConfigurationError, match="cannot read"):
        load_config(tmp_path / "nope.ini")


def test_fmt_sentinel_and_precision():
    assert cli.fmt(float("nan")) == cli.SINGULAR
    assert cli.fmt(0.1) == "0.10000000000000001"
    assert cli.fmt(3) == "3" and cli.fmt("ok") == "ok"


def _rows(path):
    lines = open(path).read().splitlines()
    assert lines[0].startswith("# gtdchem") and "units:" in lines[0]
    return lines[1].split(","), [l.split(",") for l in lines[2:]]


def test_equilibrium_command(tmp_path, capsys):
    out = tmp_path / "eq.csv"
    assert cli.main(["equilibrium", "--config", "bundled:ideal", "--out", str(out)]) == 0
    header, rows = _rows(out)
    row = dict(zip(header, rows[0]))
    assert abs(float(row["xi_root"]) - 0.285071660649186) < 1e-12
    assert row["status"] == "interior"
    assert "xi_root" in capsys.readouterr().err


def test_equilibrium_tolerance_violation():
    assert cli.main(["equilibrium", "--config", "bundled:ideal", "--tolerance", "1e-12", "--out", "/dev/null"]) == 4


def test_scan_command_is_byte_identical_on_rerun(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert cli.main(["scan", "--config", "bundled:vdw", "--grid", "2", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    header, rows = _rows(a)
    assert header == ["xi", "potential", "D", "g_xixi"] and len(rows) == 2


def test_representation_override(tmp_path):
    out = tmp_path / "eq.csv"
    assert cli.main(["equilibrium", "--config", "bundled:vdw", "--representation", "entropy_V",
                     "--out", str(out)]) == 0
    header, rows = _rows(out)
    assert dict(zip(header, rows[0]))["representation"] == "entropy_V"
    assert cli.main(["equilibrium", "--config", "bundled:vdw", "--representation", "gibbs"]) == 2


def test_curvature_single_point_and_singular_sentinel(tmp_path):
    out = tmp_path / "k.csv"
    assert cli.main(["curvature", "--config", "bundled:vdw", "--grid", "1", "--out", str(out)]) == 0
    _, rows = _rows(out)
    assert len(rows) == 1 and rows[0][3] == "ok" and float(rows[0][2]) > 1e-5

    data = json.loads(json.dumps(IDEAL_JSON))
    data["curvature"].update(grid=1, xi_min=0.285071660649186, xi_max=0.285071660649186)
    cfg = _write(tmp_path, "sing.json", json.dumps(data))
    assert cli.main(["curvature", "--config", cfg, "--out", str(out)]) == 0
    _, rows = _rows(out)
    assert rows[0][2] == cli.SINGULAR and rows[0][3] == "singular"


def test_geodesic_command(tmp_path):
    out = tmp_path / "g.csv"
    cfg = _one_run_config(tmp_path)
    assert cli.main(["geodesic", "--config", cfg, "--out", str(out)]) == 0
    header, rows = _rows(out)
    assert header == ["run_id", "tau", "E1", "E2", "V1", "V2", "norm"]
    assert abs(float(rows[-1][3]) - 0.285) < 1e-2
    assert cli.main(["geodesic", "--config", cfg, "--tolerance", "1e-12", "--out", str(out)]) == 4


def test_geodesic_numeric_failure(tmp_path):
    cfg = _one_run_config(tmp_path, xi0=0.285071660649186)
    assert cli.main(["geodesic", "--config", cfg, "--out", str(tmp_path / "g.csv")]) == 3


def test_boundary_equilibrium_exit_code(tmp_path):
    text = IDEAL_INI.replace("s0_J_per_mol_K = 2", "s0_J_per_mol_K = 5000")
    assert cli.main(["equilibrium", "--config", _write(tmp_path, "b.ini", text), "--out", "/dev/null"]) == 3


def test_exit_codes_for_config_and_io(tmp_path, capsys):
    bad = _write(tmp_path, "bad.ini", IDEAL_INI.replace("volume_L = 20", "volume_L = 0"))
    assert cli.main(["equilibrium", "--config", bad]) == 2
    assert ":4:" in capsys.readouterr().err
    assert cli.main(["equilibrium", "--config", "bundled:nothing"]) == 2
    unwritable = tmp_path / "missing-dir" / "out.csv"
    assert cli.main(["equilibrium", "--config", "bundled:ideal", "--out", str(unwritable)]) == 1


def test_figure_is_written(tmp_path):
    png = tmp_path / "scan.png"
    assert cli.main(["scan", "--config", "bundled:ideal", "--grid", "50", "--out", "/dev/null",
                     "--figure", str(png)]) == 0
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
