import csv
import subprocess
import sys

import pytest
import tomli

from marinesim import cli, config
from marinesim.errors import ConfigError

BASE = """
name = "{name}"
experiments = {experiments}

[vessel]
preset = "uuv_open_frame"
{vessel}

[gains]
Lambda = [0.6, 0.8, 0.2]
Pi = [0.6, 0.8, 0.2]
Kd = {kd}

[reference]
kind = "lawnmower"
speed = 0.25
amplitude = 2.0
period = 40.0

[initial]
eta = [1.0, -1.0, 0.3]

[sim]
{sim}
"""


def scenario(tmp_path, name="tiny", experiments='["track_body"]', vessel="",
             kd="[300.0, 100.0, 200.0]", sim="t_end = 2.0\nrecord_every = 100"):
    path = tmp_path / f"{name}.toml"
    path.write_text(BASE.format(name=name, experiments=experiments, vessel=vessel, kd=kd,
                                sim=sim))
    return str(path)


def parse_summary(text):
    out = {}
    for line in text.strip().splitlines():
        key, _, rest = line.partition("=")
        out[key] = rest
    return out


def test_list_includes_bundled(capsys):
    assert cli.main(["list"]) == 0
    names = capsys.readouterr().out.split()
    assert "uuv_sec5" in names
    assert names == config.list_scenarios()


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "marinesim.cli", "list"], capture_output=True,
                         text=True)
    assert res.returncode == 0 and "uuv_sec5" in res.stdout


@pytest.mark.parametrize("name", config.list_scenarios())
def test_describe_round_trips(name, tmp_path, capsys):
    assert cli.main(["describe", name]) == 0
    first = capsys.readouterr().out
    path = tmp_path / "echo.toml"
    path.write_text(first)
    assert cli.main(["describe", str(path)]) == 0
    assert capsys.readouterr().out == first
    resolved = tomli.loads(first)
    assert resolved["name"] == name
    assert set(resolved) >= {"vessel", "gains", "reference", "initial", "sim"}


def test_unknown_scenario_suggests(capsys):
    assert cli.main(["describe", "uuv_sec6"]) == 1
    err = capsys.readouterr().err
    assert "unknown scenario" in err and "uuv_sec5" in err
    assert cli.main(["run", "nope", "--out", "x"]) == 1


def test_indefinite_mass_is_a_config_error(tmp_path, capsys):
    path = scenario(tmp_path, vessel="M = [[290.0, 0.0, 0.0], [0.0, -404.0, 50.0], "
                                     "[0.0, 50.0, 132.0]]")
    assert cli.main(["run", path, "--out", str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    assert "invariant violated" in err and "positive definite" in err


@pytest.mark.parametrize("bad, match", [
    ('experiments = ["fly"]', "unknown experiments"),
    ("[sim]\nh = 0.5", "h <= 0.1"),
])
def test_other_config_errors(tmp_path, bad, match):
    raw = tomli.loads(open(scenario(tmp_path)).read())
    raw.update(tomli.loads(bad))
    with pytest.raises(ConfigError, match=match):
        config.resolve(raw)


def test_run_writes_csv_and_summary(tmp_path, capsys):
    out = tmp_path / "out"
    path = scenario(tmp_path, sim="t_end = 2.0\nrecord_every = 100")
    code = cli.main(["run", path, "--out", str(out), "--plots"])
    text = capsys.readouterr().out
    # two seconds are not enough to reach the tracking ratio
    assert code == 3
    with open(out / "track_body.csv") as fh:
        rows = list(csv.reader(fh))
    assert ",".join(rows[0]) == ("t,eta_1,eta_2,eta_3,nu_1,nu_2,nu_3,tau_1,tau_2,tau_3,"
                                 "H,err_eta,err_sigma,V")
    assert len(rows) == 22
    summary = parse_summary((out / "summary.txt").read_text())
    assert summary == parse_summary(text)
    assert summary["track_body.tracking_ratio"].startswith("fail")
    assert summary["checks_failed"] == "1"
    float(summary["track_body.beta_fitted"])
    assert (out / "track_body_eta.svg").exists() and (out / "track_body_errors.svg").exists()


def test_out_dir_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("MARINESIM_OUT", str(tmp_path / "env"))
    path = scenario(tmp_path, experiments='["rates"]')
    assert cli.main(["run", path]) == 0
    assert (tmp_path / "env" / "summary.txt").exists()
    monkeypatch.delenv("MARINESIM_OUT")
    assert cli.main(["run", path]) == 1
    assert "--out" in capsys.readouterr().err


def test_divergence_exit_code(tmp_path, capsys):
    path = scenario(tmp_path, kd="[1e5, 1e5, 1e5]",
                    sim='h = 0.1\nt_end = 30.0\nintegrator = "euler"\nrecord_every = 1')
    out = tmp_path / "div"
    assert cli.main(["run", path, "--out", str(out)]) == 2
    assert "error:" in capsys.readouterr().err
    assert (out / "track_body.partial.csv").exists()


def test_verify_runs_only_checks(tmp_path, capsys):
    path = scenario(tmp_path, experiments='["track_body", "rates"]')
    assert cli.main(["verify", path]) == 0
    summary = parse_summary(capsys.readouterr().out)
    assert "rates.beta" in summary and not any(k.startswith("track_body") for k in summary)


def test_seed_validation(capsys):
    with pytest.raises(SystemExit):
        cli.main(["run", "uuv_sec5", "--seed", "-1"])
    with pytest.raises(SystemExit):
        cli.main(["run", "uuv_sec5", "--seed", str(2 ** 64)])


def test_seed_controls_invariant_samples(tmp_path, capsys):
    path = scenario(tmp_path, experiments='["invariants"]')
    raw = open(path).read() + "\n[invariants]\nsamples = 50\n"
    open(path, "w").write(raw)
    vals = []
    for seed in ("1", "1", "2"):
        assert cli.main(["verify", path, "--seed", seed]) == 0
        vals.append(parse_summary(capsys.readouterr().out)["invariants.workless_C"])
    assert vals[0] == vals[1] != vals[2]


def test_lossless_scenario_passes(tmp_path, capsys):
    assert cli.main(["verify", "uuv_lossless"]) == 0
    summary = parse_summary(capsys.readouterr().out)
    assert summary["passivity.lossless_gap"].startswith("pass")


def test_numbers_use_nine_significant_digits():
    assert cli.fmt(1 / 3) == "0.333333333"
    assert cli.fmt(2) == "2"
    assert cli.fmt(True) == "1"
