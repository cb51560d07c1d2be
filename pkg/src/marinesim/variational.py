"""Variational (prolonged) dynamics, differential storage and contraction checks.

The virtual closed loops of :mod:`marinesim.control` are, in error
coordinates ``z = (eta_t, sigma)``, of the form

    z_dot = (Xi - Upsilon) Pi z + Psi omega

with ``Xi`` skew, ``Upsilon`` symmetric and ``Pi`` the storage metric, so
``W = 1/2 dz^T Pi dz`` obeys ``W_dot <= dy^T d_omega`` with
``dy = Psi^T Pi dz``.  The structured matrices are built analytically here,
while :func:`variational_flow_fd` recovers the variation of any vector field
from two co-integrated trajectories.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import control as ctl
from . import geometry as geo
from . import sim
from . import vessel as vsl
from .errors import DivergedPerturbation, EmptySampleSet

DIVERGENCE_RATIO = 1e6


def _sym(A):
    return 0.5 * (A + A.T)


def _skew_part(A):
    return 0.5 * (A - A.T)


@dataclass(frozen=True)
class StructuredVariational:
    Xi: np.ndarray
    Upsilon: np.ndarray
    Pi_full: np.ndarray
    Psi: np.ndarray

    @property
    def system_matrix(self):
        """``A`` of the variational flow ``dz_dot = A dz + Psi d_omega``."""
        return (self.Xi - self.Upsilon) @ self.Pi_full


def _assemble(gains, Xi22, Ups22, Pi22, J):
    n = gains.n
    LPi = gains.Lambda @ np.linalg.inv(gains.Pi)
    Xi = np.block([[-_skew_part(LPi), J], [-J.T, Xi22]])
    Ups = np.zeros((2 * n, 2 * n))
    Ups[:n, :n] = _sym(LPi)
    Ups[n:, n:] = Ups22
    Pi_full = np.zeros((2 * n, 2 * n))
    Pi_full[:n, :n] = gains.Pi
    Pi_full[n:, n:] = Pi22
    Psi = np.vstack([np.zeros((n, n)), np.eye(n)])
    return StructuredVariational(Xi, Ups, Pi_full, Psi)


def structured_matrices_body(params, gains, x, t=None):
    """Xi, Upsilon, Pi, Psi of the body-frame virtual loop along actual state ``x``.

    ``Xi = [[-skew(Lambda Pi^-1), J], [-J^T, -C(nu)]]``,
    ``Upsilon = blkdiag(sym(Lambda Pi^-1), D(nu) + Kd)``,
    ``Pi = blkdiag(Pi_eta, M^-1)``.
    """
    n = params.n
    xb = vsl._state_vector(x, n)
    eta, p = xb[:n], xb[n:]
    nu = params.M_inv @ p
    J = geo.kinematic_map(eta)
    C = vsl.coriolis_body(params, nu)
    D = vsl.damping_body(params, nu)
    return _assemble(gains, -_skew_part(C), _sym(D) + gains.Kd, params.M_inv, J)


def structured_matrices_inertial(params, gains, x, t=None):
    """Inertial-frame analogue: off-diagonal blocks ``+-I``, ``-S_H`` below.

    ``Upsilon_22 = D_H + Kd - 1/2 M_eta_dot`` and ``Pi_22 = M_eta^-1``; the
    metric is state dependent, see :func:`metric_derivative`.
    """
    n = params.n
    xi = vsl._state_vector(x, n)
    m = vsl.inertial_matrices(params, xi[:n], xi[n:])
    return _assemble(gains, -m.S_H, _sym(m.D_H) + gains.Kd - 0.5 * m.M_eta_dot,
                     m.M_eta_inv, np.eye(n))


def structured_matrices(params, gains, x, frame="body", t=None):
    if frame == "body":
        return structured_matrices_body(params, gains, x, t)
    return structured_matrices_inertial(params, gains, x, t)


def metric_derivative(params, gains, x, frame="body"):
    """Time derivative of the storage metric along the actual motion."""
    n = params.n
    out = np.zeros((2 * n, 2 * n))
    if frame == "body":
        return out
    xi = vsl._state_vector(x, n)
    m = vsl.inertial_matrices(params, xi[:n], xi[n:])
    out[n:, n:] = -m.M_eta_inv @ m.M_eta_dot @ m.M_eta_inv
    return out


def dpbc_inequality_check(sv, Pi_dot=None, alpha=0.0, tol=1e-9):
    """Test ``Pi_dot - 2 Pi Upsilon Pi <= -alpha Pi``.

    Returns ``(holds, margin)`` with ``margin`` the largest eigenvalue of
    ``Pi_dot - 2 Pi Upsilon Pi + alpha Pi``; ``holds`` allows a relative
    round-off slack ``tol``.
    """
    P = sv.Pi_full
    Pd = np.zeros_like(P) if Pi_dot is None else np.asarray(Pi_dot, dtype=float)
    core = 2.0 * P @ _sym(sv.Upsilon) @ P
    gap = _sym(Pd - core + alpha * P)
    margin = float(np.linalg.eigvalsh(gap)[-1])
    scale = max(np.linalg.norm(core, 2), np.linalg.norm(Pd, 2), abs(alpha) * np.linalg.norm(P, 2))
    return margin <= tol * max(scale, np.finfo(float).tiny), margin


def max_dpbc_rate(sv, Pi_dot=None):
    """Largest ``alpha`` for which :func:`dpbc_inequality_check` holds."""
    P = sv.Pi_full
    Pd = np.zeros_like(P) if Pi_dot is None else np.asarray(Pi_dot, dtype=float)
    lhs = _sym(2.0 * P @ _sym(sv.Upsilon) @ P - Pd)
    return float(scipy.linalg.eigh(lhs, _sym(P), eigvals_only=True)[0])


# --------------------------------------------------------------------------
# finite-difference variational flow


@dataclass(frozen=True)
class VariationalSample:
    t: float
    x: np.ndarray
    delta_x: np.ndarray
    W: float
    W_dot: float
    delta_u: np.ndarray
    delta_y: np.ndarray


def variational_flow_fd(dynamics, x0, delta_x0, horizon, h=1e-3, eps=1e-6,
                        omega=None, delta_omega=None, coords=None, metric=None,
                        Psi=None, record_every=1):
    """Prolonged dynamics by co-integrating ``x`` and ``x + eps dx``.

    ``dynamics(t, x, w)`` is the vector field with input ``w``; the
    perturbed copy receives ``w + eps d_omega(t)``.  ``coords(t, x)`` maps
    states to the coordinates the storage is written in (identity by
    default) and ``metric(t, x)`` gives ``Pi`` there.  ``dx`` samples are
    in those coordinates; ``W_dot`` is a central difference of ``W``.
    """
    if not 1e-8 <= eps <= 1e-4:
        raise ValueError("eps must lie in [1e-8, 1e-4]")
    x0 = np.asarray(x0, dtype=float)
    dx0 = np.asarray(delta_x0, dtype=float)
    N = x0.size
    zero_in = None
    if delta_omega is not None:
        m = np.asarray(delta_omega(0.0)).size
        zero_in = np.zeros(m)

    def w_base(t):
        if omega is not None:
            return omega(t)
        return zero_in

    def f(t, X):
        w = w_base(t)
        wp = w if delta_omega is None else w + eps * np.asarray(delta_omega(t))
        return np.concatenate([dynamics(t, X[:N], w), dynamics(t, X[N:], wp)])

    cfg = sim.SimConfig(h=h, t_end=horizon, record_every=record_every)
    times, XS = sim.integrate(f, np.concatenate([x0, x0 + eps * dx0]), cfg)

    coords = coords or (lambda t, x: x)
    samples_dz, W = [], np.empty(len(times))
    for i, (t, X) in enumerate(zip(times, XS)):
        x, xp = X[:N], X[N:]
        if np.linalg.norm(xp - x) / eps > DIVERGENCE_RATIO:
            raise DivergedPerturbation(
                f"variation exceeded {DIVERGENCE_RATIO:g} at t={t:.9g}")
        dz = (coords(t, xp) - coords(t, x)) / eps
        Pm = np.eye(dz.size) if metric is None else metric(t, x)
        W[i] = 0.5 * dz @ Pm @ dz
        samples_dz.append((dz, Pm))
    W_dot = np.gradient(W, times, edge_order=2) if len(times) > 2 else np.zeros_like(W)

    out = []
    for i, (t, X) in enumerate(zip(times, XS)):
        dz, Pm = samples_dz[i]
        du = zero_in if delta_omega is None else np.asarray(delta_omega(t), dtype=float)
        if Psi is None or du is None:
            dy = np.zeros(0) if du is None else np.zeros_like(du)
            du = np.zeros(0) if du is None else du
        else:
            dy = Psi.T @ (Pm @ dz)
        out.append(VariationalSample(float(t), X[:N].copy(), dz, float(W[i]),
                                     float(W_dot[i]), du, dy))
    return out


def virtual_variational_flow(params, gains, ref, x0, delta_xv0, horizon, h=1e-3,
                             eps=1e-6, frame="body", delta_omega=None,
                             record_every=1):
    """Variational flow of the virtual loop started on the actual state.

    The stacked state is ``[x, x_v]`` with ``x_v(0) = x(0)``; only the
    virtual copy is perturbed (by ``delta_xv0``) and driven by
    ``delta_omega``.  Storage is measured in error coordinates with the
    metric ``blkdiag(Pi, M^-1)`` (``M_eta^-1`` inertially).
    """
    n = params.n
    n2 = 2 * n
    pair = sim.paired_dynamics(params, gains, ref, frame)
    x0 = np.asarray(x0, dtype=float)

    def dynamics(t, z, w):
        return pair(t, z, w)

    def coords(t, z):
        return ctl.error_coordinates(params, gains, ref, z[n2:], t, z[:n2], frame).vector

    def metric(t, z):
        return ctl.storage_metric(params, gains, z[:n2], frame)

    Psi = np.vstack([np.zeros((n, n)), np.eye(n)])
    dz0 = np.concatenate([np.zeros(n2), np.asarray(delta_xv0, dtype=float)])
    return variational_flow_fd(dynamics, np.concatenate([x0, x0]), dz0, horizon, h, eps,
                               delta_omega=delta_omega, coords=coords, metric=metric,
                               Psi=Psi, record_every=record_every)


def fit_decay_rate(times, values, skip=0.1, floor=1e-300):
    """Least-squares slope of ``-log(values)`` after the first ``skip`` of the window.

    Samples at or below ``floor`` (round-off level) are dropped.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    keep = (t >= t[0] + skip * (t[-1] - t[0])) & (v > floor)
    if keep.sum() < 2:
        return float("nan")
    slope = np.polyfit(t[keep], np.log(v[keep]), 1)[0]
    return float(-slope)


@dataclass(frozen=True)
class PassivityReport:
    violations: int
    max_gap: float
    max_abs_gap: float
    fitted_decay: float
    tol: float
    samples: int


def differential_passivity_report(samples, tol_rel=1e-6):
    """Check ``W_dot <= dy^T du`` sample by sample.

    The tolerance is ``tol_rel * max W``.  ``fitted_decay`` is the
    exponential rate of ``W`` (nan when an input acts on the variation).
    """
    if len(samples) == 0:
        raise EmptySampleSet("differential_passivity_report needs samples")
    W = np.array([s.W for s in samples])
    W_dot = np.array([s.W_dot for s in samples])
    supply = np.array([float(s.delta_y @ s.delta_u) if s.delta_u.size else 0.0
                       for s in samples])
    gap = W_dot - supply
    tol = tol_rel * float(W.max())
    forced = any(np.any(s.delta_u != 0.0) for s in samples)
    decay = float("nan")
    if not forced:
        decay = fit_decay_rate([s.t for s in samples], W, floor=1e-24 * W.max())
    return PassivityReport(int(np.sum(gap > tol)), float(gap.max()),
                           float(np.abs(gap).max()), decay, tol, len(samples))


# --------------------------------------------------------------------------
# contraction


@dataclass(frozen=True)
class ContractionResult:
    times: np.ndarray
    distance: np.ndarray
    fitted_rate: float
    actual: np.ndarray
    virtual_a: np.ndarray
    virtual_b: np.ndarray


def contraction_experiment(params, gains, ref, x_actual0, x_v0_a, x_v0_b, horizon,
                           h=1e-3, frame="body", record_every=10):
    """Two virtual copies driven by one actual trajectory.

    The distance between them is measured in error coordinates with the
    storage metric at the actual state; ``fitted_rate`` is the exponential
    rate of that distance.
    """
    n = params.n
    n2 = 2 * n
    xs = [np.asarray(v, dtype=float) for v in (x_actual0, x_v0_a, x_v0_b)]
    for v in xs:
        geo.check_attitude(v[:n])
    f = sim.paired_dynamics(params, gains, ref, frame, copies=2)
    cfg = sim.SimConfig(h=h, t_end=horizon, record_every=record_every)
    times, Z = sim.integrate(lambda t, z: f(t, z), np.concatenate(xs), cfg)
    d = np.empty(len(times))
    for i, (t, z) in enumerate(zip(times, Z)):
        x = z[:n2]
        za = ctl.error_coordinates(params, gains, ref, z[n2:2 * n2], t, x, frame).vector
        zb = ctl.error_coordinates(params, gains, ref, z[2 * n2:], t, x, frame).vector
        dz = za - zb
        d[i] = np.sqrt(max(dz @ ctl.storage_metric(params, gains, x, frame) @ dz, 0.0))
    floor = 1e-10 * d[0] if d[0] > 0 else 0.0
    rate = fit_decay_rate(times, d, floor=floor) if d[0] > 0 else float("nan")
    return ContractionResult(times, d, rate, Z[:, :n2], Z[:, n2:2 * n2], Z[:, 2 * n2:])

