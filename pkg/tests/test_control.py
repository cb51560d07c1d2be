import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from marinesim import control as ctl
from marinesim import references as refs
from marinesim import sim
from marinesim import vessel as vsl
from marinesim._planar import PlanarKernel
from marinesim.errors import ConfigError, EmptySampleSet

from conftest import ETA0, random_state


def surge_ref(t):
    return np.zeros(3), np.array([1.0, 0.0, 0.0]), np.zeros(3)


def rest_ref(t):
    z = np.zeros(3)
    return z, z, z


def test_aux_momentum_examples(uuv, gains):
    np.testing.assert_allclose(ctl.aux_momentum_body(uuv, gains, surge_ref, np.zeros(3), 0.0),
                               [290, 0, 0], atol=1e-12)
    np.testing.assert_allclose(ctl.aux_momentum_body(uuv, gains, rest_ref, [1, 0, 0], 0.0),
                               [-174, 0, 0], atol=1e-12)
    np.testing.assert_array_equal(ctl.aux_momentum_body(uuv, gains, rest_ref, np.zeros(3), 0.0),
                                  0)
    np.testing.assert_allclose(ctl.aux_momentum_inertial(uuv, gains, surge_ref, np.zeros(3), 0.0),
                               [290, 0, 0], atol=1e-12)


def test_zero_reference_at_rest_gives_zero_force(uuv, gains):
    x = np.zeros(6)
    np.testing.assert_array_equal(ctl.control_body(uuv, gains, rest_ref, x, x, 0.0), 0)
    np.testing.assert_array_equal(ctl.control_inertial(uuv, gains, rest_ref, x, x, 0.0), 0)


def _oracle_tau(ref, x, t):
    """Straight evaluation of the body law with the UUV matrices written out."""
    M = np.array([[290.0, 0, 0], [0, 404, 50], [0, 50, 132]])
    Lam = Pi = np.diag([0.6, 0.8, 0.2])
    Kd = np.diag([300.0, 100, 200])
    eta, p = x[:3], x[3:]
    u, v, r = np.linalg.solve(M, p)
    c, s = np.cos(eta[2]), np.sin(eta[2])
    J = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    Jdot = r * np.array([[-s, -c, 0], [c, -s, 0], [0, 0, 0]])
    C = np.array([[0, 0, -(404 * v + 50 * r)], [0, 0, 290 * u], [404 * v + 50 * r, -290 * u, 0]])
    D = np.diag([95 + 268 * abs(v), 613 + 164 * abs(u), 105.0])
    ed, ded, dded = ref(t)
    e = eta - ed
    e[2] = (e[2] + np.pi) % (2 * np.pi) - np.pi
    vr = ded - Lam @ e
    p_r = M @ J.T @ vr
    eta_dot = J @ np.array([u, v, r])
    p_r_dot = M @ (Jdot.T @ vr + J.T @ (dded - Lam @ (eta_dot - ded)))
    sigma = p - p_r
    return (p_r_dot + (C + D) @ np.linalg.solve(M, p_r)
            - J.T @ Pi @ e - Kd @ np.linalg.solve(M, sigma))


def test_body_law_formula_oracle(uuv, gains, sweep):
    x = np.concatenate([ETA0, uuv.M @ [0.2, -0.1, 0.05]])
    for t in (0.0, 7.3):
        np.testing.assert_allclose(ctl.control_body(uuv, gains, sweep, x, x, t),
                                   _oracle_tau(sweep, x, t), rtol=1e-12, atol=1e-10)


def _on_reference(params, gains, ref, t=0.0, frame="body"):
    e_d = ref(t)[0]
    aux = ctl.aux_momentum_body if frame == "body" else ctl.aux_momentum_inertial
    return np.concatenate([e_d, aux(params, gains, ref, e_d, t)])


@pytest.mark.parametrize("frame", ["body", "inertial"])
def test_reference_is_invariant_field(uuv, gains, sweep, frame):
    for t in (0.0, 11.0, 23.5):
        xd = _on_reference(uuv, gains, sweep, t, frame)
        field = (ctl.virtual_closed_loop_body if frame == "body"
                 else ctl.virtual_closed_loop_inertial)
        dx = field(uuv, gains, sweep, xd, xd, t)
        terms = (ctl.control_body_terms if frame == "body"
                 else ctl.control_inertial_terms)(uuv, gains, sweep, xd, xd, t)
        np.testing.assert_allclose(terms.sigma, 0, atol=1e-12)
        np.testing.assert_allclose(terms.eta_tilde, 0, atol=0)
        np.testing.assert_allclose(dx[:3], sweep(t)[1], atol=1e-12)
        np.testing.assert_allclose(dx[3:], terms.p_r_dot, atol=1e-10)


@pytest.mark.parametrize("frame", ["body", "inertial"])
def test_reference_invariance_simulated(uuv, gains, sweep, frame):
    x0 = _on_reference(uuv, gains, sweep, 0.0, frame)
    log = sim.simulate_closed_loop(uuv, gains, sweep, frame, x0,
                                   sim.SimConfig(h=1e-3, t_end=10.0, record_every=50))
    assert np.nanmax(log.err_eta) < 1e-6


def test_6dof_reference_invariance(rov):
    s = rov
    x0 = _on_reference(s.params, s.gains, s.ref)
    log = sim.simulate_closed_loop(s.params, s.gains, s.ref, "body", x0,
                                   sim.SimConfig(h=5e-3, t_end=4.0, record_every=20))
    assert np.nanmax(log.err_eta) < 1e-6


def test_compatibility_exact(uuv, gains, sweep, rng):
    fb = ctl.closed_loop_body(uuv, gains, sweep, fast=False)
    fi = ctl.closed_loop_inertial(uuv, gains, sweep, fast=False)
    for _ in range(20):
        x = random_state(rng, uuv)
        t = rng.uniform(0, 60)
        np.testing.assert_array_equal(ctl.virtual_closed_loop_body(uuv, gains, sweep, x, x, t),
                                      fb(t, x))
        np.testing.assert_array_equal(
            ctl.virtual_closed_loop_inertial(uuv, gains, sweep, x, x, t), fi(t, x))
        tau = ctl.control_body(uuv, gains, sweep, x, x, t)
        np.testing.assert_array_equal(fb(t, x), vsl.body_ph_dynamics(uuv, x, tau))


def test_6dof_compatibility(rov, rng):
    s = rov
    for _ in range(10):
        x = random_state(rng, s.params, 0.3)
        t = rng.uniform(0, 40)
        tau = ctl.control_body(s.params, s.gains, s.ref, x, x, t)
        np.testing.assert_allclose(ctl.virtual_closed_loop_body(s.params, s.gains, s.ref, x, x, t),
                                   vsl.body_ph_dynamics(s.params, x, tau), atol=1e-9)
        xi = vsl.body_to_inertial(s.params, x)
        te = ctl.control_inertial(s.params, s.gains, s.ref, xi, xi, t)
        np.testing.assert_allclose(
            ctl.virtual_closed_loop_inertial(s.params, s.gains, s.ref, xi, xi, t),
            vsl.inertial_ph_dynamics(s.params, xi, te), atol=1e-9)


def test_planar_kernel_matches_general(uuv, gains, sweep, rng):
    k = PlanarKernel(uuv, gains, sweep)
    for _ in range(200):
        x = random_state(rng, uuv)
        xv = random_state(rng, uuv)
        t = rng.uniform(0, 60)
        for fast, general in ((k.body_virtual, ctl.virtual_closed_loop_body),
                              (k.inertial_virtual, ctl.virtual_closed_loop_inertial)):
            ref_val = general(uuv, gains, sweep, xv, x, t)
            np.testing.assert_allclose(fast(t, xv, x), ref_val,
                                       rtol=1e-12, atol=1e-12 * np.abs(ref_val).max())
        np.testing.assert_allclose(k.body(t, x), ctl.virtual_closed_loop_body(
            uuv, gains, sweep, x, x, t), rtol=1e-12, atol=1e-9)


def test_planar_kernel_needs_three_dof(rov):
    with pytest.raises(ValueError):
        PlanarKernel(rov.params, rov.gains, rov.ref)


def test_inertial_law_reduces_to_body_at_identity(uuv, gains):
    line = refs.PolynomialReference(start=(0, 0, 0), end=(10, 4, 0), duration=30.0)
    for t in (0.0, 5.0, 12.0):
        # zero yaw and yaw rate keep J at the identity
        x = np.concatenate([[0.5, -0.3, 0.0], uuv.M @ [0.3, -0.1, 0.0]])
        tb = ctl.control_body(uuv, gains, line, x, x, t)
        ti = ctl.control_inertial_terms(uuv, gains, line, x, x, t)
        np.testing.assert_allclose(ti.tau, tb, rtol=1e-12, atol=1e-10)
        np.testing.assert_allclose(ti.tau_eta, tb, rtol=1e-12, atol=1e-10)


def test_error_coordinates_wrap_and_round_trip(uuv, gains, sweep, rng):
    t = 3.0
    ed = sweep(t)[0]
    x = np.concatenate([ed + [0, 0, 2 * np.pi], np.zeros(3)])
    err = ctl.error_coordinates(uuv, gains, sweep, x, t)
    assert abs(err.eta_tilde[2]) < 1e-12
    xd = _on_reference(uuv, gains, sweep, t)
    np.testing.assert_allclose(ctl.error_coordinates(uuv, gains, sweep, xd, t).vector, 0,
                               atol=1e-12)
    for frame in ("body", "inertial"):
        for _ in range(50):
            e = ctl.ErrorState(rng.normal(size=3) * [1, 1, 0.5], rng.normal(size=3) * 50)
            xv = ctl.state_from_error(uuv, gains, sweep, e, t, frame=frame)
            back = ctl.error_coordinates(uuv, gains, sweep, xv, t, frame=frame)
            np.testing.assert_allclose(back.vector, e.vector, atol=1e-10)


def test_tracking_rate_examples(uuv, gains):
    rep = ctl.tracking_rate_report(uuv, gains, np.zeros(6))
    assert rep.beta_eta == pytest.approx(0.2, abs=1e-12)
    lam_max = np.linalg.eigvalsh(np.array([[290.0, 0, 0], [0, 404, 50], [0, 50, 132]]))[-1]
    assert rep.momentum_branch == pytest.approx(305.0 / lam_max, rel=1e-12)
    assert rep.momentum_branch == pytest.approx(0.739, abs=1e-3)
    assert rep.beta == pytest.approx(0.2, abs=1e-12)
    big = ctl.ControllerGains(gains.Lambda, gains.Pi, 1e9 * np.eye(3))
    assert ctl.tracking_rate(uuv, big, np.zeros(6)) == pytest.approx(0.2, abs=1e-12)
    slow = ctl.ControllerGains(np.eye(3), gains.Pi, [1.0, 1.0, 1.0])
    assert ctl.tracking_rate(uuv, slow, np.zeros(6)) == pytest.approx(96 / lam_max, rel=1e-12)
    assert ctl.tracking_rate(uuv, gains, np.zeros(6), frame="inertial") == pytest.approx(0.2)


def test_tracking_rate_needs_samples(uuv, gains):
    with pytest.raises(EmptySampleSet):
        ctl.tracking_rate(uuv, gains, np.zeros((0, 6)))


diag3 = st.lists(st.floats(0.01, 100.0), min_size=3, max_size=3)


@given(diag3, diag3, diag3)
def test_gains_metric_inequality(lam, pi, kd):
    g = ctl.ControllerGains(lam, pi, kd)
    assert g.beta_eta > 0
    A = g.Pi @ g.Lambda
    gap = A + A.T - 2 * g.beta_eta * g.Pi
    assert np.linalg.eigvalsh(gap)[0] >= -1e-9 * np.abs(A).max()
    # diagonal gains: beta is the smallest Lambda entry
    assert g.beta_eta == pytest.approx(min(lam), rel=1e-9)


def test_gains_validation():
    I = np.eye(3)
    with pytest.raises(ConfigError, match="invariant violated"):
        ctl.ControllerGains(-I, I, I)
    with pytest.raises(ConfigError):
        ctl.ControllerGains(I, [[1, 2, 0], [0, 1, 0], [0, 0, 1]], I)
    with pytest.raises(ConfigError, match="Kd"):
        ctl.ControllerGains(I, I, 0 * I)
    g = ctl.ControllerGains(0 * I, I, 0 * I, strict=False)
    assert g.beta_eta == 0


def test_constant_disturbance_response_is_bounded_and_linear(uuv, gains, sweep):
    x0 = np.concatenate([ETA0, np.zeros(3)])
    finals = []
    for k in (1.0, 2.0):
        w = k * np.array([2.0, -1.0, 0.5])
        log = sim.simulate_closed_loop(uuv, gains, sweep, "body", x0,
                                       sim.SimConfig(h=1e-2, t_end=30.0, record_every=100),
                                       omega=lambda t, w=w: w)
        assert np.isfinite(log.states).all()
        finals.append(log.eta[-1] - log.eta_d[-1])
    base = sim.simulate_closed_loop(uuv, gains, sweep, "body", x0,
                                    sim.SimConfig(h=1e-2, t_end=30.0, record_every=100))
    d1 = finals[0] - (base.eta[-1] - base.eta_d[-1])
    d2 = finals[1] - (base.eta[-1] - base.eta_d[-1])
    assert 1e-4 < np.linalg.norm(d1) < 10
    assert np.linalg.norm(d2) / np.linalg.norm(d1) == pytest.approx(2.0, rel=0.1)
