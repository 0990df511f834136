import csv

import numpy as np
import pytest

from femhd import io_cli
from femhd.cases import get_case, init_case
from femhd.driver import DIAG_COLUMNS, SolverConfig, run_simulation
from femhd.io_cli import (build_parser, main, read_config_file, read_diagnostics, resolve_config,
                          write_config_file, write_diagnostics, write_fields)
from femhd.mesh import ConfigurationError, build_grid
from femhd.physics import Params, make_state


def cli(argv):
    ns = build_parser().parse_args(argv)
    return io_cli._cli_values(ns)


def test_precedence_file_then_cli(tmp_path):
    cfgfile = tmp_path / "a.cfg"
    cfgfile.write_text("# comment\ncase = rp1\nnx = 500\ncfl = 0.5\ntheta_b = 0.8  # trailing\n")
    file_vals = read_config_file(cfgfile)
    rc = resolve_config(file_vals, cli(["run", "--nx", "1000", "--cfl", "0.9"]))
    assert (rc.case, rc.nx, rc.solver.cfl, rc.solver.theta_b) == ("rp1", 1000, 0.9, 0.8)
    rc = resolve_config({}, cli(["run", "--case", "rp4"]))
    assert rc.solver.c_eta == 0.01 and rc.solver.t_end == get_case("rp4").t_end


def test_theta_flag_is_recorded(tmp_path):
    rc = resolve_config({}, cli(["run", "--case", "rp2", "--theta-b", "0.55"]))
    assert rc.solver.theta_b == 0.55
    write_config_file(rc.flat(), tmp_path / "c.txt")
    assert "theta_b = 0.55" in (tmp_path / "c.txt").read_text()


def test_config_round_trip(tmp_path):
    rc = resolve_config({"case": "rotor", "nx": 40, "ny": 40, "c_h": 0.2, "dt_fixed": 1e-3})
    write_config_file(rc.flat(), tmp_path / "c.txt", header="x\ny")
    again = resolve_config(read_config_file(tmp_path / "c.txt"))
    assert again.flat() == rc.flat()


@pytest.mark.parametrize("vals", [{"case": "rp1", "bogus": 1}, {"nx": 4}, {"case": "rp1", "cfl": 2.0},
                                  {"case": "rp1", "closure": "weird"}])
def test_invalid_configuration(vals):
    with pytest.raises(ConfigurationError):
        resolve_config(vals)


def test_malformed_values(tmp_path):
    with pytest.raises(ConfigurationError):
        io_cli.parse_value("nx", "ten")
    with pytest.raises(ConfigurationError):
        io_cli.parse_value("op_cross", "maybe")
    (tmp_path / "b.cfg").write_text("case rp1\n")
    with pytest.raises(ConfigurationError):
        read_config_file(tmp_path / "b.cfg")
    assert io_cli.parse_value("dt_fixed", "none") is None


def test_unknown_case_exit_code(capsys):
    assert main(["run", "--case", "nosuch"]) == 2
    assert main(["run", "--case", "rp1", "--cfl", "0"]) == 2
    assert "error" in capsys.readouterr().err


def _read_vtk_block(text, name):
    lines = text.splitlines()
    i = lines.index(f"SCALARS {name} double 1")
    vals = []
    for ln in lines[i + 2:]:
        if ln.startswith("SCALARS"):
            break
        vals += [float(v) for v in ln.split()]
    return np.array(vals)


def test_vtk_of_a_uniform_state(tmp_path):
    g = build_grid(4, 3, 2)
    s = make_state(g, Params(), 1.5, np.array([0.1, 0, 0]).reshape(3, 1, 1, 1), 2.0,
                   np.array([0.3, 0.4, 0]).reshape(3, 1, 1, 1))
    (path,) = write_fields(s, tmp_path / "sub" / "f.vtk")
    text = path.read_text()
    assert text.startswith("# vtk DataFile Version 3.0\n")
    assert "DIMENSIONS 5 4 3" in text and "CELL_DATA 24" in text
    rho = _read_vtk_block(text, "rho")
    assert rho.size == 24 and np.all(rho == 1.5)
    np.testing.assert_allclose(_read_vtk_block(text, "Bmag"), 0.5, rtol=1e-14)
    np.testing.assert_allclose(_read_vtk_block(text, "log10_divB"), -32.0)


def test_vtk_ordering_is_x_fastest(tmp_path):
    g = build_grid(3, 2, 1)
    rho = 1.0 + np.arange(6, dtype=float).reshape(3, 2, 1)
    s = make_state(g, Params(), rho, 0.0, 1.0, 0.0)
    text = write_fields(s, tmp_path / "f.vtk")[0].read_text()
    np.testing.assert_array_equal(_read_vtk_block(text, "rho_node"), [1, 3, 5, 2, 4, 6])


def test_one_dimensional_cut_columns(tmp_path):
    spec = get_case("rp1")
    s = init_case(spec, spec.grid(20))
    (path,) = write_fields(s, tmp_path / "cut.csv", "csv_cut", axis=0)
    with path.open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "rho", "ux", "uy", "p", "By"]
    assert len(rows) == 21
    assert float(rows[1][1]) == 1.0 and float(rows[-1][1]) == 0.125


def test_angle_cut_on_a_linear_field(tmp_path):
    g = build_grid(20, 20, 1, origin=(-0.5, -0.5, 0.0),
                   bc=("transmissive", "transmissive", "periodic"))
    from femhd.mesh import NODE
    x, y, _ = g.mesh(NODE)
    s = make_state(g, Params(), 1.0 + 0.5 * x + 0.25 * y, 0.0, 1.0, 0.0)
    (path,) = write_fields(s, tmp_path / "a.csv", "csv_cut", alpha=np.pi / 4)
    d = read_diagnostics(path)  # plain numeric CSV reader
    np.testing.assert_allclose(d["y"], d["x"], atol=1e-14)
    np.testing.assert_allclose(d["rho"], 1.0 + 0.5 * d["x"] + 0.25 * d["y"], atol=1e-12)
    with pytest.raises(ValueError):
        write_fields(s, tmp_path / "z", "hdf5")


def test_diagnostics_file(tmp_path):
    spec = get_case("ot_ideal")
    res = run_simulation(init_case(spec, spec.grid(16, 16)), SolverConfig(t_end=0.3))
    path = write_diagnostics(res.records, tmp_path / "d.csv")
    with path.open() as fh:
        header = next(csv.reader(fh))
    assert header == list(DIAG_COLUMNS)
    d = read_diagnostics(path)
    assert len(d["t"]) == res.steps + 1
    assert np.all(np.diff(d["t"]) > 0) and d["t"][-1] == pytest.approx(0.3, abs=1e-15)
    assert np.all(np.isfinite(d["mass"]))
    with pytest.raises(ValueError):
        write_diagnostics([], tmp_path / "e.csv")


def test_cli_run_writes_artifacts_and_is_deterministic(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("FEMHD_OUTPUT_ROOT", str(tmp_path))
    argv = ["run", "--case", "rp1", "--nx", "64", "--t-end", "0.02", "--cadence", "2"]
    assert main(argv) == 0
    out = tmp_path / "rp1_64x1x1"
    for name in ("config.txt", "VERSION", "diagnostics.csv", "fields_initial.vtk",
                 "fields_final.vtk", "cut_x.csv", "fields_000002.vtk"):
        assert (out / name).exists(), name
    first = (out / "diagnostics.csv").read_text()
    first_cut = (out / "cut_x.csv").read_text()
    assert main(argv) == 0
    # wall-clock column aside, repeated runs agree bit for bit
    strip = [c for c in DIAG_COLUMNS if c != "wall"]
    a = read_diagnostics(out / "diagnostics.csv")
    (tmp_path / "first.csv").write_text(first)
    b = read_diagnostics(tmp_path / "first.csv")
    for c in strip:
        np.testing.assert_array_equal(a[c], b[c])
    assert (out / "cut_x.csv").read_text() == first_cut
    assert "steps" in capsys.readouterr().out


def test_cli_rotor_cuts(tmp_path):
    assert main(["run", "--case", "rotor", "--nx", "24", "--ny", "24", "--t-end", "0.002",
                 "--out", str(tmp_path / "r")]) == 0
    for name in ("cut_x.csv", "cut_y.csv", "cut_alpha_pi_4.csv", "cut_alpha_m_pi_16.csv"):
        assert (tmp_path / "r" / name).exists()


def test_selftest_and_case_listing(capsys):
    assert main(["selftest"]) == 0
    assert main(["cases"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "rp1" in out and "ot3d" in out
