import configparser
import json

import pytest

from geomgates import cli
from geomgates.config import default_config_path


@pytest.fixture()
def fast_ini(tmp_path):
    """Config with small grids so CLI runs stay quick."""
    cp = configparser.ConfigParser()
    cp.read(default_config_path())
    cp.set("fig1", "tau_points", "3")
    cp.set("fig1", "tau_max", "16.0")
    cp.set("fig2", "tau_points", "5")
    cp.set("fig2", "tau_min", "40.0")
    cp.set("fig2", "tau_max", "120.0")
    cp.set("fig2", "field_samples", "64")
    cp.set("sweep", "detuning_points", "2")
    path = tmp_path / "fast.ini"
    with open(path, "w") as fh:
        cp.write(fh)
    return path


def test_fig1b_writes_csv(tmp_path, fast_ini, capsys):
    out = tmp_path / "out"
    rc = cli.main(["fig1b", "--config", str(fast_ini), "--out", str(out)])
    assert rc == 0
    assert (out / "fig1b.csv").exists()
    assert "fig1b.csv" in capsys.readouterr().out


def test_steps_and_tol_overrides_land_in_header(tmp_path, fast_ini):
    out = tmp_path / "out"
    rc = cli.main(
        [
            "fig1a",
            "--config", str(fast_ini),
            "--out", str(out),
            "--steps", "512",
            "--tol", "1e-8",
        ]
    )
    assert rc == 0
    text = (out / "fig1a.csv").read_text()
    assert "# steps_per_period = 512" in text
    assert "# tolerance = 1e-08" in text


def test_fig2c_reports_and_exits_zero(tmp_path, fast_ini, capsys):
    out = tmp_path / "out"
    rc = cli.main(["fig2c", "--config", str(fast_ini), "--out", str(out)])
    captured = capsys.readouterr().out
    assert rc == 0
    assert "overall: PASS" in captured
    assert (out / "fig2c_crossover.json").exists()


def test_json_format(tmp_path, fast_ini):
    out = tmp_path / "out"
    rc = cli.main(
        ["fig1a", "--config", str(fast_ini), "--out", str(out), "--format", "json"]
    )
    assert rc == 0
    doc = json.loads((out / "fig1a.json").read_text())
    assert "gamma0_exact" in doc["columns"]


def test_sweep_subcommand(tmp_path, fast_ini):
    out = tmp_path / "out"
    assert cli.main(["sweep", "--config", str(fast_ini), "--out", str(out)]) == 0
    assert (out / "sweep.csv").exists()


def test_missing_config_exits_two(tmp_path, capsys):
    rc = cli.main(["fig1a", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path)])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_broken_config_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[fig1]\nomega0 = fast\n")
    rc = cli.main(["fig1a", "--config", str(bad), "--out", str(tmp_path)])
    assert rc == 2


def test_gate_subcommand_success_and_failure(tmp_path, fast_ini, capsys):
    spec = {
        "platform": "nmr",
        "omega0": 7.745966692414834,
        "omega1": 0.8,
        "omega": 1.9364916731037085,
    }
    good = tmp_path / "gate.json"
    good.write_text(json.dumps(spec))
    out = tmp_path / "out"
    rc = cli.main(["gate", str(good), "--config", str(fast_ini), "--out", str(out)])
    assert rc == 0
    assert (out / "gate_report.json").exists()
    assert "dynamical_cancelled: True" in capsys.readouterr().out

    # retracing without the sign flip leaves the dynamical phase in place
    adding = tmp_path / "gate2.json"
    adding.write_text(json.dumps(dict(spec, reversal="time_reversed")))
    rc = cli.main(["gate", str(adding), "--config", str(fast_ini), "--out", str(out)])
    assert rc == 1


def test_gate_missing_spec_exits_two(tmp_path, fast_ini):
    rc = cli.main(
        ["gate", str(tmp_path / "none.json"), "--config", str(fast_ini), "--out", str(tmp_path)]
    )
    assert rc == 2


def test_unknown_subcommand_rejected():
    with pytest.raises(SystemExit) as exc:
        cli.main(["render"])
    assert exc.value.code == 2


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
    assert "geomgates" in capsys.readouterr().out
