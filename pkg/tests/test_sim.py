import csv
import math

import numpy as np
import pytest

from marinesim import control as ctl
from marinesim import sim
from marinesim import variational as var
from marinesim.errors import ConfigError, NonFiniteState

from conftest import ETA0


def decay(t, x):
    return -x


def test_rk4_single_step():
    x1 = sim.rk4_step(decay, np.array([1.0]), 0.0, 0.1)[0]
    assert x1 == pytest.approx(0.9048375, abs=1e-12)
    assert abs(x1 - math.exp(-0.1)) < 1e-7


def test_zero_field_is_fixed():
    x = np.array([1.0, -2.0, 3.0])
    for step in sim.STEPPERS.values():
        np.testing.assert_array_equal(step(lambda t, x: np.zeros_like(x), x, 0.0, 0.05), x)


def _global_error(h, integrator="rk4"):
    times, xs = sim.integrate(decay, np.array([1.0]),
                              sim.SimConfig(h=h, t_end=1.0, integrator=integrator))
    assert times[-1] == pytest.approx(1.0)
    return abs(xs[-1, 0] - math.exp(-1.0))


def test_rk4_order():
    ratio = _global_error(0.1) / _global_error(0.05)
    assert 12 <= ratio <= 20


def test_euler_order():
    ratio = _global_error(0.01, "euler") / _global_error(0.005, "euler")
    assert 1.8 <= ratio <= 2.2


def test_record_every_keeps_grid():
    times, xs = sim.integrate(decay, np.array([1.0]),
                              sim.SimConfig(h=0.01, t_end=1.0, record_every=10))
    np.testing.assert_allclose(times, np.linspace(0, 1, 11), atol=1e-12)
    assert (np.diff(times) > 0).all()


@pytest.mark.parametrize("kw", [dict(h=0.0), dict(h=0.2), dict(t_end=-1.0),
                                dict(integrator="rk45"), dict(record_every=0)])
def test_config_invariants(kw):
    with pytest.raises(ConfigError):
        sim.SimConfig(**kw)


def test_non_finite_state_keeps_prefix():
    def blow(t, x):
        return np.array([np.inf]) if t >= 0.5 else -x

    with pytest.raises(NonFiniteState) as info:
        sim.integrate(blow, np.array([1.0]), sim.SimConfig(h=0.1, t_end=1.0))
    times, states = info.value.log
    assert len(times) == len(states) > 0
    assert times[-1] < 0.5 + 1e-12
    assert np.isfinite(states).all()


def test_closed_loop_log_invariants(uuv, gains, sweep, tmp_path):
    x0 = np.concatenate([ETA0, np.zeros(3)])
    log = sim.simulate_closed_loop(uuv, gains, sweep, "body", x0,
                                   sim.SimConfig(h=1e-3, t_end=2.0, record_every=100))
    k = len(log)
    for a in (log.states, log.nu, log.tau, log.H, log.err_eta, log.err_sigma, log.V):
        assert len(a) == k
    assert (np.diff(log.times) > 0).all()
    path = tmp_path / "log.csv"
    log.to_csv(path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "eta_1", "eta_2", "eta_3", "nu_1", "nu_2", "nu_3",
                       "tau_1", "tau_2", "tau_3", "H", "err_eta", "err_sigma", "V"]
    assert len(rows) == k + 1
    assert float(rows[-1][0]) == pytest.approx(2.0)


def test_determinism(uuv, gains, sweep):
    x0 = np.concatenate([ETA0, np.zeros(3)])
    cfg = sim.SimConfig(h=1e-3, t_end=3.0, record_every=100)
    a = sim.simulate_closed_loop(uuv, gains, sweep, "inertial", x0, cfg)
    b = sim.simulate_closed_loop(uuv, gains, sweep, "inertial", x0, cfg)
    assert np.array_equal(a.rows(), b.rows())


def test_step_halving(uuv, gains, sweep):
    x0 = np.concatenate([ETA0, np.zeros(3)])
    ends = [sim.simulate_closed_loop(uuv, gains, sweep, "body", x0,
                                     sim.SimConfig(h=h, t_end=20.0, record_every=1000)).eta[-1]
            for h in (1e-3, 5e-4)]
    assert np.abs(ends[0] - ends[1]).max() < 1e-6


def test_open_loop_energy_bookkeeping(uuv):
    from marinesim import vessel as vsl
    x0 = np.concatenate([[0, 0, 0.4], uuv.M @ [1.0, 0.5, -0.2]])
    log = sim.simulate_open_loop(uuv, x0, sim.SimConfig(h=1e-3, t_end=4.0))
    p = np.array([nu @ vsl.damping_body(uuv, nu) @ nu for nu in log.nu])
    # per-step power balance, trapezoid over each step
    dH = np.diff(log.H)
    dW = -0.5 * (p[1:] + p[:-1]) * np.diff(log.times)
    assert np.abs(dH - dW).max() <= 1e-5 * np.abs(dH).max()


def test_virtual_pair_identical_start(uuv, gains, sweep):
    x0 = np.concatenate([ETA0, np.zeros(3)])
    cfg = sim.SimConfig(h=1e-3, t_end=5.0, record_every=100)
    for frame in ("body", "inertial"):
        act, vir = sim.simulate_virtual_pair(uuv, gains, sweep, x0, x0, cfg, frame)
        assert np.array_equal(act.states, vir.states)
        alone = sim.simulate_closed_loop(uuv, gains, sweep, frame, x0, cfg)
        assert np.array_equal(act.states, alone.states)


def _pair_rate(uuv, gains, sweep, xa, xv):
    act, vir = sim.simulate_virtual_pair(uuv, gains, sweep, xa, xv,
                                         sim.SimConfig(h=1e-3, t_end=30.0, record_every=50))
    d = np.empty(len(act))
    for i, (t, x, xv) in enumerate(zip(act.times, act.states, vir.states)):
        dz = (ctl.error_coordinates(uuv, gains, sweep, xv, t, x).vector
              - ctl.error_coordinates(uuv, gains, sweep, x, t, x).vector)
        d[i] = np.sqrt(dz @ ctl.storage_metric(uuv, gains) @ dz)
    # the second half isolates the slowest mode
    return d, var.fit_decay_rate(act.times, d, skip=0.5)


def test_virtual_pair_converges_and_swap_symmetry(uuv, gains, sweep):
    xa = np.concatenate([ETA0, np.zeros(3)])
    xb = xa + np.array([0.5, -0.5, 0.1, 0, 0, 0])
    d1, r1 = _pair_rate(uuv, gains, sweep, xa, xb)
    d2, r2 = _pair_rate(uuv, gains, sweep, xb, xa)
    assert d1[-1] < 1e-2 * d1[0] and d2[-1] < 1e-2 * d2[0]
    assert r2 == pytest.approx(r1, rel=0.05)
