"""Virtual differential-passivity-based tracking controllers.

The design works on a *virtual* copy ``x_v`` of the craft whose
interconnection and damping matrices are frozen along the actual state
``x``.  With the pose error ``eta_t = eta_v - eta_d`` and the momentum
error ``sigma = p_v - p_r``, the controllers below turn the virtual loop
into

    eta_t_dot = -Lambda eta_t + Jm M^-1 sigma
    sigma_dot = -Jm^T Pi eta_t - (S + Kd_eff) M^-1 sigma + omega

(``Jm = J(eta)`` in the body frame, the identity in the inertial frame),
which is differentially passive from ``omega`` to ``M^-1 sigma``.  Setting
``x_v = x`` gives the controller for the actual craft.

Body frame
    ``p_r = M J(eta)^-1 (eta_d_dot - Lambda eta_t)`` and
    ``tau = p_r_dot + J^T dP/deta_v + (C + D) M^-1 p_r
    - J^T Pi eta_t - Kd M^-1 sigma + omega``.

Inertial frame
    ``p_r = M_eta (eta_d_dot - Lambda eta_t)`` and
    ``tau_eta = p_r_dot + dP/deta_v + (E_eta + D_eta) M_eta^-1 p_r
    - Pi eta_t - Kd M_eta^-1 sigma + omega``; the thrust command is
    ``tau = J^T tau_eta``.

The position metric ``Pi`` is constant, so the integral feedback term is
exactly ``Pi eta_t``.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import geometry as geo
from . import vessel as vsl
from ._planar import PlanarKernel
from .errors import ConfigError, EmptySampleSet


def _as_matrix(a, n=None):
    a = np.array(a, dtype=float)
    if a.ndim == 1:
        a = np.diag(a)
    if n is not None and a.shape != (n, n):
        raise ConfigError(f"gain matrix must be {n}x{n}, got {a.shape}")
    return a


def _sym_check(name, A, psd=True):
    if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise ConfigError(f"invariant violated: {name} symmetric")
    lam = np.linalg.eigvalsh(0.5 * (A + A.T))
    if psd and lam[0] < 0.0:
        raise ConfigError(f"invariant violated: {name} positive semidefinite")
    return lam


@dataclass(frozen=True)
class ControllerGains:
    """Slope ``Lambda`` of phi(eta_t) = Lambda eta_t, metric ``Pi`` and damping ``Kd``.

    Vectors are read as diagonals.  With ``strict`` (the default) the
    metric inequality ``Pi Lambda + Lambda^T Pi >= 2 beta Pi`` must hold with
    ``beta > 0`` and ``Kd`` must be positive definite.  ``strict=False``
    admits semidefinite ``Lambda`` and ``Kd``, e.g. for lossless checks.
    """

    Lambda: np.ndarray
    Pi: np.ndarray
    Kd: np.ndarray
    strict: bool = True

    def __post_init__(self):
        Lam = _as_matrix(self.Lambda)
        n = Lam.shape[0]
        Pi = _as_matrix(self.Pi, n)
        Kd = _as_matrix(self.Kd, n)
        if Lam.shape != (n, n):
            raise ConfigError("Lambda must be square")
        _sym_check("Lambda", Lam)
        lam_pi = _sym_check("Pi", Pi)
        lam_kd = _sym_check("Kd", Kd)
        if lam_pi[0] <= 0.0:
            raise ConfigError("invariant violated: Pi positive definite")
        beta = metric_rate(Lam, Pi)
        if self.strict:
            if beta <= 0.0:
                raise ConfigError(
                    "invariant violated: Pi Lambda + Lambda^T Pi >= 2 beta Pi with beta > 0"
                )
            if lam_kd[0] <= 0.0:
                raise ConfigError("invariant violated: Kd positive definite")
        object.__setattr__(self, "Lambda", Lam)
        object.__setattr__(self, "Pi", Pi)
        object.__setattr__(self, "Kd", Kd)
        object.__setattr__(self, "beta_eta", beta)

    @property
    def n(self):
        return self.Lambda.shape[0]


def metric_rate(Lambda, Pi):
    """Largest beta with ``Pi Lambda + Lambda^T Pi >= 2 beta Pi``."""
    A = Pi @ Lambda
    lam = scipy.linalg.eigh(A + A.T, Pi, eigvals_only=True)
    return 0.5 * float(lam[0])


def uuv_gains():
    """Gains used with the open-frame UUV: Pi = Lambda = diag(0.6, 0.8, 0.2)."""
    lam = [0.6, 0.8, 0.2]
    return ControllerGains(lam, lam, [300.0, 100.0, 200.0])


@dataclass(frozen=True)
class ErrorState:
    eta_tilde: np.ndarray
    sigma: np.ndarray

    @property
    def vector(self):
        return np.concatenate([self.eta_tilde, self.sigma])


def pose_error(eta, eta_d):
    """``eta - eta_d`` with attitude components wrapped to (-pi, pi]."""
    return geo.wrap_pose(np.asarray(eta, dtype=float) - np.asarray(eta_d, dtype=float))


def _split(x, n):
    x = vsl._state_vector(x, n)
    return x[:n], x[n:]


# --------------------------------------------------------------------------
# body frame


@dataclass(frozen=True)
class BodyControlTerms:
    tau: np.ndarray
    tau_ff: np.ndarray
    tau_fb: np.ndarray
    p_r: np.ndarray
    p_r_dot: np.ndarray
    eta_tilde: np.ndarray
    sigma: np.ndarray


def aux_momentum_body(params, gains, ref, eta_v, t, eta=None):
    """p_r = M J(eta)^-1 (eta_d_dot - Lambda eta_t); ``eta`` defaults to ``eta_v``."""
    eta_v = np.asarray(eta_v, dtype=float)
    eta = eta_v if eta is None else np.asarray(eta, dtype=float)
    e_d, de_d, _ = ref(t)
    et = pose_error(eta_v, e_d)
    return params.M @ (geo.kinematic_map_inverse(eta) @ (de_d - gains.Lambda @ et))


def control_body_terms(params, gains, ref, x_v, x, t, omega=None):
    n = params.n
    eta_v, p_v = _split(x_v, n)
    eta, p = _split(x, n)
    M, Minv = params.M, params.M_inv
    J = geo.kinematic_map(eta)
    Ji = geo.kinematic_map_inverse(eta)
    nu = Minv @ p
    dJi = geo.kinematic_map_inverse_derivative(eta, J @ nu)

    e_d, de_d, dde_d = ref(t)
    et = pose_error(eta_v, e_d)
    v_r = de_d - gains.Lambda @ et
    eta_v_dot = J @ (Minv @ p_v)
    p_r = M @ (Ji @ v_r)
    p_r_dot = M @ (dJi @ v_r + Ji @ (dde_d - gains.Lambda @ (eta_v_dot - de_d)))
    sigma = p_v - p_r

    J2 = vsl.coriolis_body(params, nu) + vsl.damping_body(params, nu)
    tau_ff = p_r_dot + J.T @ params.restoring.gradient(eta_v) + J2 @ (Minv @ p_r)
    tau_fb = -J.T @ (gains.Pi @ et) - gains.Kd @ (Minv @ sigma)
    tau = tau_ff + tau_fb
    if omega is not None:
        tau = tau + omega
    return BodyControlTerms(tau, tau_ff, tau_fb, p_r, p_r_dot, et, sigma)


def control_body(params, gains, ref, x_v, x, t, omega=None):
    """Body-frame generalized force for virtual state ``x_v`` along actual ``x``."""
    return control_body_terms(params, gains, ref, x_v, x, t, omega).tau


def virtual_body_dynamics(params, x_v, x, tau):
    """Virtual body model: J and J2 frozen on ``x``, gradients on ``x_v``."""
    n = params.n
    eta_v, p_v = _split(x_v, n)
    eta, p = _split(x, n)
    J = geo.kinematic_map(eta)
    nu = params.M_inv @ p
    J2 = vsl.coriolis_body(params, nu) + vsl.damping_body(params, nu)
    nu_v = params.M_inv @ p_v
    dp = -J.T @ params.restoring.gradient(eta_v) - J2 @ nu_v + tau
    return np.concatenate([J @ nu_v, dp])


def virtual_closed_loop_body(params, gains, ref, x_v, x, t, omega=None):
    tau = control_body(params, gains, ref, x_v, x, t, omega)
    return virtual_body_dynamics(params, x_v, x, tau)


def _planar_kernel(params, gains, ref, kernel=None):
    return kernel if kernel is not None else PlanarKernel(params, gains, ref)


def _planar_field(kernel_method, n):
    def f(t, x, omega=None):
        dx = kernel_method(t, x)
        if omega is not None:
            dx[n:] += omega
        return dx
    return f


def closed_loop_body(params, gains, ref, fast=True, kernel=None):
    """``f(t, x)`` for the actual craft under ``tau(x, x, t)``.

    Planar craft use the scalar kernel of :mod:`marinesim._planar` unless
    ``fast`` is off; ``kernel`` lets several fields share one instance.
    """
    if fast and params.n == 3:
        return _planar_field(_planar_kernel(params, gains, ref, kernel).body, 3)

    def f(t, x, omega=None):
        tau = control_body(params, gains, ref, x, x, t, omega)
        return vsl.body_ph_dynamics(params, x, tau)
    return f


# --------------------------------------------------------------------------
# inertial frame


@dataclass(frozen=True)
class InertialControlTerms:
    tau_eta: np.ndarray
    tau: np.ndarray
    tau_ff: np.ndarray
    tau_fb: np.ndarray
    p_r: np.ndarray
    p_r_dot: np.ndarray
    eta_tilde: np.ndarray
    sigma: np.ndarray
    matrices: object


def aux_momentum_inertial(params, gains, ref, eta_v, t, eta=None):
    """p_r = M_eta(eta) (eta_d_dot - Lambda eta_t)."""
    eta_v = np.asarray(eta_v, dtype=float)
    eta = eta_v if eta is None else np.asarray(eta, dtype=float)
    e_d, de_d, _ = ref(t)
    et = pose_error(eta_v, e_d)
    return vsl.inertia_inertial(params, eta) @ (de_d - gains.Lambda @ et)


def control_inertial_terms(params, gains, ref, x_v, x, t, omega=None, matrices=None):
    n = params.n
    eta_v, p_v = _split(x_v, n)
    eta, p = _split(x, n)
    m = matrices if matrices is not None else vsl.inertial_matrices(params, eta, p)

    e_d, de_d, dde_d = ref(t)
    et = pose_error(eta_v, e_d)
    v_r = de_d - gains.Lambda @ et
    eta_v_dot = m.M_eta_inv @ p_v
    p_r = m.M_eta @ v_r
    p_r_dot = m.M_eta_dot @ v_r + m.M_eta @ (dde_d - gains.Lambda @ (eta_v_dot - de_d))
    sigma = p_v - p_r

    tau_ff = p_r_dot + params.restoring.gradient(eta_v) + (m.E + m.D_H) @ (m.M_eta_inv @ p_r)
    tau_fb = -gains.Pi @ et - gains.Kd @ (m.M_eta_inv @ sigma)
    tau_eta = tau_ff + tau_fb
    if omega is not None:
        tau_eta = tau_eta + omega
    tau = geo.kinematic_map(eta).T @ tau_eta
    return InertialControlTerms(tau_eta, tau, tau_ff, tau_fb, p_r, p_r_dot, et, sigma, m)


def control_inertial(params, gains, ref, x_v, x, t, omega=None):
    """Inertial-frame generalized force ``tau_eta``; thrust is ``J^T tau_eta``."""
    return control_inertial_terms(params, gains, ref, x_v, x, t, omega).tau_eta


def virtual_inertial_dynamics(params, x_v, x, tau_eta, matrices=None):
    n = params.n
    eta_v, p_v = _split(x_v, n)
    eta, p = _split(x, n)
    m = matrices if matrices is not None else vsl.inertial_matrices(params, eta, p)
    eta_v_dot = m.M_eta_inv @ p_v
    dp = -params.restoring.gradient(eta_v) - (m.E + m.D_H) @ eta_v_dot + tau_eta
    return np.concatenate([eta_v_dot, dp])


def virtual_closed_loop_inertial(params, gains, ref, x_v, x, t, omega=None):
    terms = control_inertial_terms(params, gains, ref, x_v, x, t, omega)
    return virtual_inertial_dynamics(params, x_v, x, terms.tau_eta, terms.matrices)


def closed_loop_inertial(params, gains, ref, fast=True, kernel=None):
    if fast and params.n == 3:
        return _planar_field(_planar_kernel(params, gains, ref, kernel).inertial, 3)

    def f(t, x, omega=None):
        terms = control_inertial_terms(params, gains, ref, x, x, t, omega)
        return virtual_inertial_dynamics(params, x, x, terms.tau_eta, terms.matrices)
    return f


def virtual_field(params, gains, ref, frame="body", fast=True, kernel=None):
    """``g(t, x_v, x, omega)``: virtual closed loop of ``frame`` along actual ``x``."""
    if frame not in ("body", "inertial"):
        raise ConfigError(f"frame must be 'body' or 'inertial', got {frame!r}")
    if fast and params.n == 3:
        k = _planar_kernel(params, gains, ref, kernel)
        method = k.body_virtual if frame == "body" else k.inertial_virtual

        def g(t, x_v, x, omega=None):
            dx = method(t, x_v, x)
            if omega is not None:
                dx[3:] += omega
            return dx
        return g
    general = virtual_closed_loop_body if frame == "body" else virtual_closed_loop_inertial

    def g(t, x_v, x, omega=None):
        return general(params, gains, ref, x_v, x, t, omega)
    return g


# --------------------------------------------------------------------------
# error coordinates and rates


def error_coordinates(params, gains, ref, x_v, t, x=None, frame="body"):
    """(eta_t, sigma) of a virtual state; ``x`` defaults to ``x_v``."""
    n = params.n
    eta_v, p_v = _split(x_v, n)
    eta = eta_v if x is None else _split(x, n)[0]
    aux = aux_momentum_body if frame == "body" else aux_momentum_inertial
    p_r = aux(params, gains, ref, eta_v, t, eta)
    e_d = ref(t)[0]
    return ErrorState(pose_error(eta_v, e_d), p_v - p_r)


def state_from_error(params, gains, ref, err, t, eta=None, frame="body"):
    """Inverse of :func:`error_coordinates` (attitude taken as eta_d + eta_t)."""
    e_d = ref(t)[0]
    eta_v = e_d + err.eta_tilde
    aux = aux_momentum_body if frame == "body" else aux_momentum_inertial
    p_r = aux(params, gains, ref, eta_v, t, eta_v if eta is None else eta)
    return np.concatenate([eta_v, err.sigma + p_r])


def storage_metric(params, gains, x=None, frame="body"):
    """blkdiag(Pi, M^-1) (body) or blkdiag(Pi, M_eta^-1) (inertial)."""
    n = params.n
    G = np.zeros((2 * n, 2 * n))
    G[:n, :n] = gains.Pi
    if frame == "body":
        G[n:, n:] = params.M_inv
    else:
        eta = _split(x, n)[0]
        J = geo.kinematic_map(eta)
        G[n:, n:] = J @ params.M_inv @ J.T
    return G


def tracking_storage(params, gains, err, x=None, frame="body"):
    """V = 1/2 eta_t^T Pi eta_t + 1/2 sigma^T M^-1 sigma (M_eta^-1 inertially)."""
    z = err.vector if isinstance(err, ErrorState) else np.asarray(err)
    return 0.5 * z @ storage_metric(params, gains, x, frame) @ z


@dataclass(frozen=True)
class RateReport:
    beta: float
    beta_eta: float
    momentum_branch: float
    frame: str


def tracking_rate_report(params, gains, traj_samples, frame="body"):
    """Exponential tracking rate ``min(beta_eta, min_k lambda(D+Kd) lambda(M^-1))``.

    ``traj_samples`` are states ``[eta, p]`` of the given frame.  The damping
    branch is an infimum over the samples, so the rate is conditional on the
    trajectory they came from.
    """
    samples = np.atleast_2d(np.asarray(traj_samples, dtype=float))
    if samples.size == 0:
        raise EmptySampleSet("tracking_rate needs at least one trajectory sample")
    n = params.n
    branch = np.inf
    for x in samples:
        eta, p = x[:n], x[n:]
        if frame == "body":
            nu = params.M_inv @ p
            D = vsl.damping_body(params, nu)
            lam_minv = 1.0 / params.lambda_max_M
        else:
            m = vsl.inertial_matrices(params, eta, p)
            D = m.D_H
            lam_minv = np.linalg.eigvalsh(m.M_eta_inv)[0]
        lam_d = np.linalg.eigvalsh(0.5 * (D + D.T) + gains.Kd)[0]
        branch = min(branch, lam_d * lam_minv)
    return RateReport(min(gains.beta_eta, branch), gains.beta_eta, branch, frame)


def tracking_rate(params, gains, traj_samples, frame="body"):
    return tracking_rate_report(params, gains, traj_samples, frame).beta
