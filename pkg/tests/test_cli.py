import json

import numpy as np
import pytest

from jcphase import acceptance, cli, phasespace as ps

SMALL_GRID = "-2,2,-2,2,21,21"


def run(args):
    return cli.main(args)


def test_parse_times():
    assert cli.parse_times("0,0.5,2").tolist() == [0.0, 0.5, 2.0]
    assert cli.parse_times("0:1:5").tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    with pytest.raises(cli.ConfigError):
        cli.parse_times("a,b")


def test_flags_override_config_file(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("p3 = 0.1\nnmax = 8\ngrid = -1,1,-1,1,5,5\n")
    args = cli.build_parser().parse_args(["steady", "--config", str(cfg_file), "--nmax", "6"])
    cfg = cli.resolve_config("steady", args)
    assert cfg["p3"] == [0.1] and cfg["nmax"] == 6 and cfg["grid"]["nx"] == 5


def test_config_rejects_unknown_key(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("p4 = 0.1\n")
    assert run(["steady", "--config", str(cfg_file)]) == 2


@pytest.mark.parametrize("argv", [
    ["steady", "--p3", "0.1", "--eps-d", "3"],
    ["steady", "--p3", "0.3"],
    ["g2", "--p3", "0"],
    ["steady", "--grid", "1,0,0,1,3,3"],
    ["revival", "--ntrunc", "5"],
    ["transient", "--times=-1,0"],
])
def test_invalid_configs_exit_2(argv, tmp_path):
    assert run(argv + ["--out", str(tmp_path)]) == 2


def test_transient_outputs_are_deterministic(tmp_path, capsys):
    argv = ["transient", "--grid=" + SMALL_GRID, "--times", "0,0.3549"]
    assert run(argv + ["--out", str(tmp_path / "a")]) == 0
    assert run(argv + ["--out", str(tmp_path / "b")]) == 0
    capsys.readouterr()
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert len(files) == 5
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    report = json.loads((tmp_path / "a" / "transient_report.json").read_text())
    first, second = report["points"]
    assert first["ring_variance"] < 1e-6 and first["min"] > 0
    assert second["W_origin"] < 0 and second["negative_area"] > 0


def test_field_metadata_header(tmp_path, capsys):
    run(["transient", "--grid=" + SMALL_GRID, "--times", "0", "--out", str(tmp_path)])
    capsys.readouterr()
    csv = next(tmp_path.glob("wigner_*.csv"))
    head = [l for l in csv.read_text().splitlines() if l.startswith("#")]
    keys = {l[2:].split(":")[0] for l in head}
    assert {"config", "config_sha256", "nmax", "tolerances"} <= keys
    assert ps.read_field_csv(csv).values.shape == (21, 21)


def test_steady_zero_drive_is_vacuum(tmp_path, capsys):
    assert run(["steady", "--p3", "0", "--nmax", "6", "--grid=" + SMALL_GRID, "--out", str(tmp_path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["points"][0]["max_abs_discrepancy"] < 1e-12
    field = ps.read_field_csv(tmp_path / "wigner_analytic_p3_0.csv")
    z = field.grid.points()
    assert np.allclose(field.values, 2 / np.pi * np.exp(-2 * np.abs(z) ** 2))


def test_steady_reports_both_fields(tmp_path, capsys):
    assert run(["steady", "--p3", "0.05,0.2", "--nmax", "10", "--grid=" + SMALL_GRID,
                "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    assert len(list(tmp_path.glob("wigner_*.csv"))) == 4
    report = json.loads((tmp_path / "steady_report.json").read_text())
    assert [p["label"] for p in report["points"]] == ["p3_0.05", "p3_0.2"]


def test_eps_d_input(tmp_path, capsys):
    assert run(["steady", "--eps-d", "10", "--nmax", "8", "--grid=" + SMALL_GRID, "--out", str(tmp_path)]) == 0
    report = json.loads(capsys.readouterr().out)
    omega2 = (2 * np.sqrt(2) * 100 / 500) ** 2
    assert report["points"][0]["p3"] == pytest.approx(omega2 / (1 + 4 * omega2))


def test_g2_report(tmp_path, capsys):
    argv = ["g2", "--p3", "0.247,0.005", "--times", "0:0.6:6001", "--out", str(tmp_path)]
    assert run(argv) == 0
    report = json.loads(capsys.readouterr().out)
    hi, lo = report["points"]
    assert hi["g2_0"] == pytest.approx(0.65, abs=0.01) and hi["regime"] == "antibunching"
    assert hi["max_value"] == pytest.approx(1.43, abs=0.01)
    assert abs(hi["max_tau"] - 0.3549) < hi["beat_period"]
    assert hi["g2_at_tau_10"] == pytest.approx(1.0, abs=0.01)
    assert lo["regime"] == "bunching"


def test_g2_numeric_overlay(tmp_path, capsys):
    argv = ["g2", "--p3", "0.05", "--times", "0,0.05", "--nmax", "6", "--numeric", "--out", str(tmp_path)]
    assert run(argv) == 0
    capsys.readouterr()
    header = [l for l in (tmp_path / "g2_p3_0.05.csv").read_text().splitlines() if not l.startswith("#")][0]
    assert header == "gamma_tau,g2_beat,g2_averaged,g2_numeric"


def test_revival_outputs(tmp_path, capsys):
    argv = ["revival", "--times", "0:20:41", "--insets", "50", "--grid=-4,4,-4,4,31,31",
            "--ntrunc", "30", "--out", str(tmp_path)]
    assert run(argv) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["insets"][0]["oracle_max_abs_discrepancy"] < 1e-6
    assert (tmp_path / "revival_photon_number.csv").exists()


def test_revival_vacuum_rabi_trace(tmp_path, capsys):
    argv = ["revival", "--alpha0", "0", "--ntrunc", "4", "--times", "0:3:7", "--insets", "",
            "--out", str(tmp_path)]
    assert run(argv) == 0
    capsys.readouterr()
    rows = [l for l in (tmp_path / "revival_photon_number.csv").read_text().splitlines()
            if l and not l.startswith("#")][1:]
    t, n = np.array([[float(v) for v in r.split(",")] for r in rows]).T
    assert np.allclose(n, np.sin(t) ** 2, atol=1e-12)


@pytest.mark.parametrize("outcome, code", [(True, 0), (False, 1)])
def test_verify_exit_status(monkeypatch, outcome, code):
    monkeypatch.setattr(acceptance, "run_all", lambda seed=0: outcome)
    assert run(["verify"]) == code
