"""Bundled scenarios run end to end and pass all of their checks."""
import pytest

from marinesim import cli, config
from marinesim import experiments as exps


@pytest.mark.parametrize("name", ["uuv_circle_inertial", "uuv_frames", "rov6_hydrostatic"])
def test_bundled_scenario_passes(name, tmp_path, capsys):
    scn = config.load_scenario(name)
    code, results = cli.execute(scn, scn.experiments, tmp_path, seed=3)
    assert code == 0, [c for r in results for c in r.checks if not c.passed]
    assert (tmp_path / "summary.txt").exists()
    for r in results:
        if r.header is not None:
            assert (tmp_path / f"{r.name}.csv").exists()


def test_frames_scenario_agrees_across_frames(tmp_path, capsys):
    scn = config.load_scenario("uuv_frames")
    _, results = cli.execute(scn, ["track_body", "track_inertial"], tmp_path)
    assert results[1].metrics["cross_frame_eta_gap"] < 1e-4


def test_invariants_experiment_is_seeded():
    scn = config.load_scenario("uuv_sec5")
    scn.options["invariants"]["samples"] = 100
    a = exps.invariants(scn, 7)
    b = exps.invariants(scn, 7)
    assert a.metrics == b.metrics and a.passed


def test_rates_from_samples(capsys):
    scn = config.load_scenario("uuv_sec5")
    res = exps.rates(scn)
    assert res.metrics["beta"] == pytest.approx(0.2)
    assert res.metrics["momentum_branch"] == pytest.approx(0.7387, abs=1e-4)
    assert res.passed


def test_sec5_run_with_plots(tmp_path, capsys):
    out = tmp_path / "sec5"
    assert cli.main(["run", "uuv_sec5", "--out", str(out), "--plots"]) == 0
    for name in ("track_body", "track_inertial", "contraction", "passivity", "equivalence"):
        assert (out / f"{name}.csv").exists()
    assert (out / "track_body_eta.svg").exists()
    assert (out / "contraction_distance.svg").exists()
    assert (out / "passivity_W.svg").exists()
    header = (out / "contraction.csv").read_text().splitlines()[0]
    assert header.endswith("H,err_eta,err_sigma,V,W,W_dot,gap")
