"""Fixed-step integration, closed-loop and paired simulations, trajectory logs."""
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import control as ctl
from . import geometry as geo
from . import vessel as vsl
from ._planar import PlanarKernel, PlanarPlant
from .errors import ConfigError, MarineSimError, NonFiniteState


@dataclass(frozen=True)
class SimConfig:
    h: float = 1e-3
    t_end: float = 10.0
    integrator: str = "rk4"
    record_every: int = 1

    def __post_init__(self):
        if not 0.0 < self.h <= 0.1:
            raise ConfigError(f"invariant violated: 0 < h <= 0.1 (h={self.h})")
        if self.t_end <= 0.0:
            raise ConfigError("invariant violated: t_end > 0")
        if self.integrator not in STEPPERS:
            raise ConfigError(f"integrator must be one of {sorted(STEPPERS)}")
        if int(self.record_every) < 1:
            raise ConfigError("invariant violated: record_every >= 1")

    @property
    def steps(self):
        return int(round(self.t_end / self.h))


def rk4_step(f, x, t, h):
    """Classical fourth-order Runge-Kutta step for ``x' = f(t, x)``.

    A non-finite stage propagates into the result, so callers only need to
    check the returned state.
    """
    hh = 0.5 * h
    k1 = f(t, x)
    k2 = f(t + hh, x + hh * k1)
    k3 = f(t + hh, x + hh * k2)
    k4 = f(t + h, x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def euler_step(f, x, t, h):
    return x + h * f(t, x)


STEPPERS = {"rk4": rk4_step, "euler": euler_step}


def integrate(f, x0, cfg, t0=0.0):
    """March ``x' = f(t, x)`` on the fixed grid of ``cfg``.

    Returns ``(times, states)`` holding every ``record_every``-th step plus
    the final one.  On a non-finite state the recorded prefix is attached to
    the raised :class:`NonFiniteState` as ``(times, states)``.
    """
    step = STEPPERS[cfg.integrator]
    x = np.array(x0, dtype=float)
    every = int(cfg.record_every)
    nsteps = cfg.steps
    times, states = [t0], [x.copy()]
    with np.errstate(all="ignore"):
        for i in range(1, nsteps + 1):
            t = t0 + (i - 1) * cfg.h
            try:
                x_new = step(f, x, t, cfg.h)
            except MarineSimError:
                raise
            except (ValueError, OverflowError):
                # math.cos(inf) and friends in the scalar kernels
                x_new = np.full_like(x, np.nan)
            if not math.isfinite(x_new.sum()):
                raise NonFiniteState(f"non-finite state at t={t + cfg.h:.9g}",
                                     (np.array(times), np.array(states)))
            x = x_new
            if i % every == 0 or i == nsteps:
                times.append(t0 + i * cfg.h)
                states.append(x.copy())
    return np.array(times), np.array(states)


# --------------------------------------------------------------------------
# logs


@dataclass
class TrajectoryLog:
    """Time-indexed record of a run.  ``states`` are in the log's ``frame``."""

    times: np.ndarray
    states: np.ndarray
    nu: np.ndarray
    tau: np.ndarray
    H: np.ndarray
    err_eta: np.ndarray
    err_sigma: np.ndarray
    V: np.ndarray
    eta_d: np.ndarray
    frame: str = "body"
    extra: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.nu.shape[1]

    @property
    def eta(self):
        return self.states[:, : self.n]

    def __len__(self):
        return len(self.times)

    def columns(self):
        n = self.n
        cols = ["t"]
        cols += [f"eta_{i + 1}" for i in range(n)]
        cols += [f"nu_{i + 1}" for i in range(n)]
        cols += [f"tau_{i + 1}" for i in range(n)]
        cols += ["H", "err_eta", "err_sigma", "V"]
        return cols

    def rows(self):
        return np.column_stack([
            self.times, self.eta, self.nu, self.tau,
            self.H, self.err_eta, self.err_sigma, self.V,
        ])

    def to_csv(self, path):
        write_csv(path, self.columns(), self.rows())


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.9g}" for v in row])


def _body_state(params, x, frame):
    return x if frame == "body" else vsl.inertial_to_body(params, x)


def build_log(params, times, states, frame="body", gains=None, ref=None,
              actual_states=None, omega=None):
    """Evaluate inputs, energy and tracking errors at recorded samples.

    ``actual_states`` (for virtual logs) supplies the trajectory the virtual
    system is frozen on; by default the states are their own actual states.
    """
    n = params.n
    k = len(times)
    nu = np.empty((k, n))
    tau = np.zeros((k, n))
    H = np.empty(k)
    err_eta = np.full(k, np.nan)
    err_sigma = np.full(k, np.nan)
    V = np.full(k, np.nan)
    eta_d = np.full((k, n), np.nan)
    actual = states if actual_states is None else actual_states
    if gains is None:
        # open loop: only velocities and energy, evaluated in bulk
        states = np.asarray(states)
        xb = states if frame == "body" else np.array([vsl.inertial_to_body(params, x)
                                                      for x in states])
        nu = xb[:, n:] @ params.M_inv.T
        pot = np.array([params.restoring.potential(x[:n]) for x in xb])
        H = 0.5 * np.einsum("ij,ij->i", xb[:, n:], nu) + pot
        return TrajectoryLog(np.asarray(times), states, nu, tau, H,
                             err_eta, err_sigma, V, eta_d, frame)
    for i, (t, x) in enumerate(zip(times, states)):
        xa = actual[i]
        xb = _body_state(params, x, frame)
        nu[i] = params.M_inv @ xb[n:]
        H[i] = vsl.hamiltonian_body(params, xb)
        if gains is None:
            continue
        w = None if omega is None else omega(t)
        if frame == "body":
            terms = ctl.control_body_terms(params, gains, ref, x, xa, t, w)
            tau[i] = terms.tau
        else:
            terms = ctl.control_inertial_terms(params, gains, ref, x, xa, t, w)
            tau[i] = terms.tau
        err = ctl.ErrorState(terms.eta_tilde, terms.sigma)
        err_eta[i] = np.linalg.norm(err.eta_tilde)
        err_sigma[i] = np.linalg.norm(err.sigma)
        V[i] = ctl.tracking_storage(params, gains, err, xa, frame)
        eta_d[i] = ref(t)[0]
    return TrajectoryLog(np.asarray(times), np.asarray(states), nu, tau, H,
                         err_eta, err_sigma, V, eta_d, frame)


def _frame_vector(params, x0, frame):
    if isinstance(x0, vsl.BodyState):
        v = x0.vector
        return v if frame == "body" else vsl.body_to_inertial(params, v)
    if isinstance(x0, vsl.InertialState):
        v = x0.vector
        return v if frame == "inertial" else vsl.inertial_to_body(params, v)
    return vsl._state_vector(x0, params.n)


def _run(f, x0, cfg, make_log):
    try:
        times, states = integrate(f, x0, cfg)
    except NonFiniteState as exc:
        if exc.log is not None and len(exc.log[0]):
            # the last samples of a diverging run may overflow derived columns
            with np.errstate(all="ignore"):
                exc.log = make_log(*exc.log)
        raise
    return make_log(times, states)


def simulate_closed_loop(params, gains, ref, frame, x0, cfg, omega=None):
    """Actual craft under its own v-dPBC law, virtual state replaced by ``x``.

    ``x0`` is a state of ``frame`` ("body" or "inertial"), or a
    :class:`BodyState`/:class:`InertialState` which is converted.
    """
    if frame not in ("body", "inertial"):
        raise ConfigError(f"frame must be 'body' or 'inertial', got {frame!r}")
    x0 = _frame_vector(params, x0, frame)
    geo.check_attitude(x0[: params.n])
    base = (ctl.closed_loop_body if frame == "body" else ctl.closed_loop_inertial)(
        params, gains, ref)
    f = base if omega is None else (lambda t, x: base(t, x, omega(t)))
    return _run(f, x0, cfg, lambda ts, xs: build_log(
        params, ts, xs, frame, gains, ref, omega=omega))


def simulate_open_loop(params, x0, cfg, tau=None, frame="body"):
    """Uncontrolled craft; ``tau(t, x)`` is an optional input in ``frame`` coordinates."""
    n = params.n
    x0 = _frame_vector(params, x0, frame)
    if n == 3:
        plant = PlanarPlant(params)
        fast = plant.body if frame == "body" else plant.inertial

        def model(_, x, u):
            return fast(x, u)
    else:
        model = vsl.body_ph_dynamics if frame == "body" else vsl.inertial_ph_dynamics
    zero = np.zeros(n)

    def f(t, x):
        return model(params, x, zero if tau is None else tau(t, x))

    return _run(f, x0, cfg, lambda ts, xs: build_log(params, ts, xs, frame))


def paired_dynamics(params, gains, ref, frame="body", omega=None, copies=1):
    """Vector field of ``z = [x, x_v1, ..., x_vk]``: actual loop plus virtual copies.

    ``omega(t)`` drives only the virtual copies.
    """
    n2 = 2 * params.n
    kernel = PlanarKernel(params, gains, ref) if params.n == 3 else None
    actual = (ctl.closed_loop_body if frame == "body" else ctl.closed_loop_inertial)(
        params, gains, ref, kernel=kernel)
    virtual = ctl.virtual_field(params, gains, ref, frame, kernel=kernel)

    def f(t, z, w=None):
        x = z[:n2]
        if w is None and omega is not None:
            w = omega(t)
        parts = [actual(t, x)]
        for j in range(1, copies + 1):
            parts.append(virtual(t, z[j * n2:(j + 1) * n2], x, w))
        return np.concatenate(parts)

    return f


def simulate_virtual_pair(params, gains, ref, x0_actual, x_v0, cfg, frame="body",
                          omega=None):
    """Co-integrate the actual closed loop and a virtual copy on one step schedule.

    Returns ``(actual_log, virtual_log)``.
    """
    n = params.n
    xa = _frame_vector(params, x0_actual, frame)
    xv = _frame_vector(params, x_v0, frame)
    geo.check_attitude(xa[:n])
    geo.check_attitude(xv[:n])
    f = paired_dynamics(params, gains, ref, frame, omega)

    def logs(ts, zs):
        a = build_log(params, ts, zs[:, : 2 * n], frame, gains, ref)
        v = build_log(params, ts, zs[:, 2 * n:], frame, gains, ref,
                      actual_states=zs[:, : 2 * n], omega=omega)
        return a, v

    return _run(lambda t, z: f(t, z), np.concatenate([xa, xv]), cfg, logs)
