"""CLI contract tests: output formats, exit codes, file schemas."""

import json
import struct

import numpy as np
import pytest

from levylab import cli, levy
from levylab.fieldgrid import Grid, GridField, load_field, load_trajectory, save_field


@pytest.fixture()
def measure_file(tmp_path):
    m = levy.StableSpectral(1.0, levy.SphericalMeasure.isotropic(1, 2 / np.pi))
    path = tmp_path / "m.json"
    levy.save_measure(m, path)
    return str(path)


@pytest.fixture()
def phi_file(tmp_path):
    g = Grid(1, 128, 2 * np.pi)
    x = g.coordinates()[..., 0]
    path = tmp_path / "phi.bin"
    save_field(GridField(g, np.sin(x)[None]), path)
    return str(path)


# ---------------------------------------------------------------------------
# symbol
# ---------------------------------------------------------------------------

def test_symbol_zero_frequency(measure_file, capsys):
    assert cli.main(["symbol", "--measure", measure_file, "--xi", "0"]) == 0
    assert capsys.readouterr().out.strip() == "0+0i"


def test_symbol_value(measure_file, capsys):
    assert cli.main(["symbol", "--measure", measure_file, "--xi", "3"]) == 0
    out = capsys.readouterr().out.strip()
    assert out == "3+0i"


def test_symbol_dimension_mismatch(measure_file, capsys):
    assert cli.main(["symbol", "--measure", measure_file,
                     "--xi", "1,2"]) == 2


def test_symbol_malformed_xi(measure_file):
    assert cli.main(["symbol", "--measure", measure_file,
                     "--xi", "abc"]) == 2


def test_missing_required_flag_exits_2(measure_file, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["symbol", "--measure", measure_file])
    assert exc.value.code == 2
    assert "--xi" in capsys.readouterr().err


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2


def test_bad_measure_file_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["symbol", "--measure", str(bad), "--xi", "1"]) == 2
    assert cli.main(["symbol", "--measure", str(tmp_path / "missing.json"),
                     "--xi", "1"]) == 2


# ---------------------------------------------------------------------------
# kernel
# ---------------------------------------------------------------------------

def test_kernel_writes_valid_field_and_manifest(measure_file, tmp_path,
                                                capsys):
    out = tmp_path / "p.bin"
    assert cli.main(["kernel", "--measure", measure_file, "--t", "1.0",
                     "--grid", "512,100", "--out", str(out)]) == 0
    # binary schema: <qqdq header then float64 values
    raw = out.read_bytes()
    dim, n, length, m = struct.unpack_from("<qqdq", raw)
    assert (dim, n, length, m) == (1, 512, 100.0, 1)
    field = load_field(out)
    assert float(np.sum(field.values)) * field.grid.cell_volume == \
        pytest.approx(1.0, abs=1e-9)
    manifest = (tmp_path / "p.bin.manifest").read_text()
    assert "command:" in manifest and "artifact:" in manifest


def test_kernel_grid_dimension_mismatch(measure_file, tmp_path):
    assert cli.main(["kernel", "--measure", measure_file, "--t", "1.0",
                     "--grid", "2,64,10", "--out",
                     str(tmp_path / "x.bin")]) == 2


def test_kernel_failure_exits_1(measure_file, tmp_path):
    # resolution failure inside the library maps to exit 1
    m = levy.StableSpectral(1.9, levy.SphericalMeasure.isotropic(1, 1.0))
    path = tmp_path / "m19.json"
    levy.save_measure(m, path)
    assert cli.main(["kernel", "--measure", str(path), "--t", "0.001",
                     "--grid", "32,100", "--out",
                     str(tmp_path / "x.bin")]) == 1


# ---------------------------------------------------------------------------
# evolve / burgers / hj / sde
# ---------------------------------------------------------------------------

def test_evolve_round_trip(measure_file, phi_file, tmp_path):
    prob = tmp_path / "prob.json"
    cfg = tmp_path / "cfg.json"
    prob.write_text(json.dumps({
        "measure": levy.to_dict(levy.load_measure(measure_file)),
        "phi": phi_file, "horizon": 0.25, "lam": 0.0,
        "drift": {"type": "constant", "value": [0.5]}}))
    cfg.write_text(json.dumps({"time_step": 0.25 / 32}))
    out = tmp_path / "run"
    assert cli.main(["evolve", "--problem", str(prob), "--config", str(cfg),
                     "--out", str(out)]) == 0
    traj = load_trajectory(out / "solution.traj")
    assert len(traj.frames) == 33
    assert (out / "manifest.txt").exists()


def test_evolve_unknown_solver(measure_file, phi_file, tmp_path):
    prob = tmp_path / "prob.json"
    cfg = tmp_path / "cfg.json"
    prob.write_text(json.dumps({
        "measure": levy.to_dict(levy.load_measure(measure_file)),
        "phi": phi_file, "horizon": 0.25}))
    cfg.write_text(json.dumps({"time_step": 0.01, "solver": "magic"}))
    assert cli.main(["evolve", "--problem", str(prob), "--config", str(cfg),
                     "--out", str(tmp_path / "run")]) == 2


def test_burgers_subcommand(phi_file, tmp_path):
    out = tmp_path / "burg"
    assert cli.main(["burgers", "--phi", phi_file, "--T", "0.25",
                     "--dt", str(0.25 / 32), "--out", str(out)]) == 0
    traj = load_trajectory(out / "solution.traj")
    assert max(abs(float(fr.values.max())) for fr in traj.frames) <= 1 + 1e-6


def test_hj_unknown_hamiltonian(phi_file, tmp_path):
    assert cli.main(["hj", "--hamiltonian", "nope", "--phi", phi_file,
                     "--T", "0.25", "--dt", "0.01",
                     "--out", str(tmp_path / "x")]) == 2


def test_sde_summary_schema(measure_file, tmp_path):
    g = Grid(1, 512, 120.0)
    x = g.coordinates()[..., 0]
    phi_path = tmp_path / "phi.bin"
    save_field(GridField(g, np.exp(-0.5 * (x - 60.0) ** 2)[None]), phi_path)
    prob = tmp_path / "sde.json"
    prob.write_text(json.dumps({
        "measure": levy.to_dict(levy.load_measure(measure_file)),
        "phi": str(phi_path), "t": 0.3, "x": [60.0], "n_steps": 8}))
    out = tmp_path / "summary.txt"
    assert cli.main(["sde", "--problem", str(prob), "--paths", "2000",
                     "--seed", "7", "--out", str(out)]) == 0
    text = out.read_text()
    for key in ("estimate:", "std-error:", "paths: 2000",
                "exit-fraction:", "seconds:"):
        assert key in text
    assert (tmp_path / "summary.txt.manifest").exists()


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def test_verify_single_check(capsys):
    assert cli.main(["verify", "--check", "symbol-stable"]) == 0
    assert "[PASS] symbol-stable" in capsys.readouterr().out


def test_verify_unknown_check():
    assert cli.main(["verify", "--check", "not-a-check"]) == 2


def test_verify_without_selection():
    assert cli.main(["verify"]) == 2
