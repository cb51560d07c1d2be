"""Craft parameters and the two port-Hamiltonian motion models.

Body frame, state ``x = [eta, p_b]`` with quasi-momentum ``p_b = M nu``::

    eta_dot = J(eta) M^-1 p_b
    p_b_dot = -J(eta)^T dP/deta - (C(nu) + D(nu)) M^-1 p_b + tau

Inertial frame, state ``x = [eta, p]`` with ``p = J^-T p_b = M_eta eta_dot``::

    eta_dot = M_eta^-1 p
    p_dot   = -dP/deta - (E_eta + D_eta) M_eta^-1 p + tau_eta

where ``E_eta = S_eta - 1/2 dM_eta/dt`` and ``S_eta`` is a skew-symmetric
workless matrix.  ``S_eta`` is built from the kinematic map as
``J^-T C J^-1 + 1/2 (X - X^T)`` with ``X = J^-T M d(J^-1)/dt``; see
:func:`inertial_matrices`.

Dynamics functions take and return flat arrays of length ``2n`` so they can
be handed straight to the integrators in :mod:`marinesim.sim`.
"""
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .errors import ConfigError
from .geometry import Dof


# --------------------------------------------------------------------------
# restoring models


class NoRestoring:
    """g(eta) = 0, P(eta) = 0."""

    def potential(self, eta):
        return 0.0

    def gradient(self, eta):
        return np.zeros(np.asarray(eta).size)

    def describe(self):
        return {"kind": "none"}


@dataclass(frozen=True)
class QuadraticPotential:
    """Spring-like potential ``1/2 (eta - eta0)^T K (eta - eta0)``.

    Not a hydrostatic model; handy for exercising the potential terms on
    planar craft (mooring lines, test fixtures).
    """

    stiffness: np.ndarray
    eta0: np.ndarray

    def __post_init__(self):
        K = np.array(self.stiffness, dtype=float)
        if K.ndim == 1:
            K = np.diag(K)
        object.__setattr__(self, "stiffness", K)
        object.__setattr__(self, "eta0", np.array(self.eta0, dtype=float))

    def potential(self, eta):
        d = np.asarray(eta, dtype=float) - self.eta0
        return 0.5 * d @ self.stiffness @ d

    def gradient(self, eta):
        return self.stiffness @ (np.asarray(eta, dtype=float) - self.eta0)

    def describe(self):
        return {"kind": "quadratic", "stiffness": self.stiffness.tolist(),
                "eta0": self.eta0.tolist()}


@dataclass(frozen=True)
class HydrostaticRestoring:
    """Gravity and buoyancy of a submerged 6-DOF craft (NED, z down).

    ``P(eta) = -(W - B) z - e3^T R(phi, theta, psi) (W r_g - B r_b)``,
    whose body-frame generalized force ``J^T dP/deta`` is the familiar
    restoring vector g(eta).
    """

    weight: float
    buoyancy: float
    r_g: np.ndarray
    r_b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "r_g", np.array(self.r_g, dtype=float).reshape(3))
        object.__setattr__(self, "r_b", np.array(self.r_b, dtype=float).reshape(3))

    @property
    def _moment(self):
        return self.weight * self.r_g - self.buoyancy * self.r_b

    def potential(self, eta):
        eta = np.asarray(eta, dtype=float)
        phi, theta = eta[3], eta[4]
        row3 = np.array([-np.sin(theta), np.cos(theta) * np.sin(phi),
                         np.cos(theta) * np.cos(phi)])
        return -(self.weight - self.buoyancy) * eta[2] - row3 @ self._moment

    def gradient(self, eta):
        eta = np.asarray(eta, dtype=float)
        phi, theta = eta[3], eta[4]
        sf, cf, st, ct = np.sin(phi), np.cos(phi), np.sin(theta), np.cos(theta)
        cx, cy, cz = self._moment
        grad = np.zeros(6)
        grad[2] = -(self.weight - self.buoyancy)
        grad[3] = -(ct * cf * cy - ct * sf * cz)
        grad[4] = -(-ct * cx - st * sf * cy - st * cf * cz)
        return grad

    def describe(self):
        return {"kind": "hydrostatic", "weight": self.weight,
                "buoyancy": self.buoyancy, "r_g": self.r_g.tolist(),
                "r_b": self.r_b.tolist()}


# --------------------------------------------------------------------------
# parameters and states


def rigid_body_inertia(mass, inertia, r_g):
    """6x6 rigid-body mass matrix about the body origin."""
    S = geo.skew(r_g)
    M = np.zeros((6, 6))
    M[:3, :3] = mass * np.eye(3)
    M[:3, 3:] = -mass * S
    M[3:, :3] = mass * S
    M[3:, 3:] = np.asarray(inertia, dtype=float)
    return M


@dataclass(frozen=True)
class VesselParams:
    """One craft: inertia, damping and restoring model.

    The damping matrix is diagonal,
    ``D(nu)[i, i] = d_lin[i] + sum_j d_quad[i, j] |nu_j|``.
    """

    dof: Dof
    M: np.ndarray
    d_lin: np.ndarray
    d_quad: np.ndarray = None
    restoring: object = field(default_factory=NoRestoring)
    r_gb: np.ndarray = None
    name: str = ""

    def __post_init__(self):
        dof = Dof(self.dof)
        n = dof.n
        M = np.array(self.M, dtype=float)
        if M.shape != (n, n):
            raise ConfigError(f"M must be {n}x{n} for {dof.value}, got {M.shape}")
        if not np.allclose(M, M.T, rtol=0.0, atol=1e-9 * max(1.0, np.abs(M).max())):
            raise ConfigError("invariant violated: M symmetric")
        M = 0.5 * (M + M.T)
        lam = np.linalg.eigvalsh(M)
        if lam[0] <= 0.0:
            raise ConfigError(
                f"invariant violated: M positive definite (min eigenvalue {lam[0]:.6g})"
            )
        d_lin = np.array(self.d_lin, dtype=float).reshape(-1)
        if d_lin.size != n:
            raise ConfigError(f"d_lin must have {n} entries")
        d_quad = (np.zeros((n, n)) if self.d_quad is None
                  else np.array(self.d_quad, dtype=float))
        if d_quad.shape != (n, n):
            raise ConfigError(f"d_quad must be {n}x{n}")
        if (d_lin < 0).any() or (d_quad < 0).any():
            raise ConfigError("invariant violated: damping coefficients non-negative")
        r_gb = np.zeros(3) if self.r_gb is None else np.array(self.r_gb, dtype=float)
        restoring = self.restoring if self.restoring is not None else NoRestoring()
        if dof is Dof.PLANAR3 and isinstance(restoring, HydrostaticRestoring):
            raise ConfigError("hydrostatic restoring needs a full6 craft")

        object.__setattr__(self, "dof", dof)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "d_lin", d_lin)
        object.__setattr__(self, "d_quad", d_quad)
        object.__setattr__(self, "r_gb", r_gb)
        object.__setattr__(self, "restoring", restoring)
        object.__setattr__(self, "M_inv", np.linalg.inv(M))
        object.__setattr__(self, "_lam_M", lam)

    @property
    def n(self):
        return self.dof.n

    @property
    def d_min(self):
        return float(self.d_lin.min())

    @property
    def lambda_max_M(self):
        return float(self._lam_M[-1])

    def with_damping(self, d_lin, d_quad=None):
        return VesselParams(self.dof, self.M, d_lin, d_quad, self.restoring,
                            self.r_gb, self.name)

    def undamped(self):
        return self.with_damping(np.zeros(self.n))


def uuv_open_frame():
    """Open-frame underwater vehicle in surge, sway and yaw."""
    M = [[290.0, 0.0, 0.0], [0.0, 404.0, 50.0], [0.0, 50.0, 132.0]]
    d_lin = [95.0, 613.0, 105.0]
    d_quad = [[0.0, 268.0, 0.0], [164.0, 0.0, 0.0], [0.0, 0.0, 0.0]]
    return VesselParams(Dof.PLANAR3, M, d_lin, d_quad, name="uuv_open_frame")


def _state_vector(x, n=None):
    if hasattr(x, "vector"):
        x = x.vector
    x = np.asarray(x, dtype=float).reshape(-1)
    if n is not None and x.size != 2 * n:
        raise ValueError(f"state must have {2 * n} entries, got {x.size}")
    return x


@dataclass(frozen=True)
class BodyState:
    """Pose and body-frame quasi-momentum ``p_b = M nu``."""

    eta: np.ndarray
    p_b: np.ndarray

    def __post_init__(self):
        eta = np.array(self.eta, dtype=float).reshape(-1)
        p_b = np.array(self.p_b, dtype=float).reshape(-1)
        if eta.size not in (3, 6) or p_b.size != eta.size:
            raise ValueError("BodyState needs matching 3- or 6-vectors")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "p_b", p_b)

    @classmethod
    def from_vector(cls, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        n = x.size // 2
        return cls(x[:n], x[n:])

    @classmethod
    def from_velocity(cls, params, eta, nu):
        return cls(eta, params.M @ np.asarray(nu, dtype=float))

    @property
    def vector(self):
        return np.concatenate([self.eta, self.p_b])

    @property
    def pose(self):
        return geo.Pose.from_vector(self.eta)


@dataclass(frozen=True)
class InertialState:
    """Pose and inertial momentum ``p = M_eta eta_dot``."""

    eta: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        eta = np.array(self.eta, dtype=float).reshape(-1)
        p = np.array(self.p, dtype=float).reshape(-1)
        if eta.size not in (3, 6) or p.size != eta.size:
            raise ValueError("InertialState needs matching 3- or 6-vectors")
        geo.check_attitude(eta)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_vector(cls, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        n = x.size // 2
        return cls(x[:n], x[n:])

    @property
    def vector(self):
        return np.concatenate([self.eta, self.p])


# --------------------------------------------------------------------------
# body-frame model


def coriolis_body(params, nu):
    """Skew-symmetric Kirchhoff Coriolis-centripetal matrix C(nu)."""
    nu = np.asarray(nu, dtype=float).reshape(-1)
    a = params.M @ nu
    if nu.size == 3:
        return np.array([
            [0.0, 0.0, -a[1]],
            [0.0, 0.0, a[0]],
            [a[1], -a[0], 0.0],
        ])
    S1, S2 = geo.skew(a[:3]), geo.skew(a[3:])
    C = np.zeros((6, 6))
    C[:3, 3:] = -S1
    C[3:, :3] = -S1
    C[3:, 3:] = -S2
    return C


def damping_body(params, nu):
    nu = np.asarray(nu, dtype=float).reshape(-1)
    return np.diag(params.d_lin + params.d_quad @ np.abs(nu))


def restoring_force(params, eta):
    """Body-frame restoring vector g(eta) = J(eta)^T dP/deta."""
    return geo.kinematic_map(eta).T @ params.restoring.gradient(eta)


def body_velocity(params, x):
    x = _state_vector(x, params.n)
    return params.M_inv @ x[params.n:]


def body_ph_dynamics(params, x, tau):
    """Vector field of the body-frame pH model; returns ``[eta_dot, p_b_dot]``."""
    n = params.n
    x = _state_vector(x, n)
    eta, p_b = x[:n], x[n:]
    J = geo.kinematic_map(eta)
    nu = params.M_inv @ p_b
    J2 = coriolis_body(params, nu) + damping_body(params, nu)
    dp = -J.T @ params.restoring.gradient(eta) - J2 @ nu + tau
    return np.concatenate([J @ nu, dp])


def hamiltonian_body(params, x):
    n = params.n
    x = _state_vector(x, n)
    p_b = x[n:]
    return 0.5 * p_b @ params.M_inv @ p_b + params.restoring.potential(x[:n])


# --------------------------------------------------------------------------
# inertial-frame model


@dataclass(frozen=True)
class InertialMatrices:
    M_eta: np.ndarray
    M_eta_inv: np.ndarray
    D_H: np.ndarray
    S_H: np.ndarray
    E: np.ndarray
    M_eta_dot: np.ndarray
    g_eta: np.ndarray
    eta_dot: np.ndarray
    nu: np.ndarray


def inertial_matrices(params, eta, p):
    """Matrices of the inertial pH model at ``(eta, p)``.

    ``S_H = J^-T C(nu) J^-1 + 1/2 (X - X^T)`` with ``X = J^-T M d(J^-1)/dt``
    evaluated along ``eta_dot = M_eta^-1 p``; ``M_eta_dot = X + X^T`` is
    exact, so ``E = S_H - 1/2 M_eta_dot = J^-T C J^-1 - X^T``.
    """
    eta = geo.check_attitude(eta)
    p = np.asarray(p, dtype=float).reshape(-1)
    M = params.M
    J = geo.kinematic_map(eta)
    Ji = geo.kinematic_map_inverse(eta)
    nu = params.M_inv @ (J.T @ p)
    eta_dot = J @ nu
    dJi = geo.kinematic_map_inverse_derivative(eta, eta_dot)
    X = Ji.T @ M @ dJi
    M_eta_dot = X + X.T
    S_H = Ji.T @ coriolis_body(params, nu) @ Ji + 0.5 * (X - X.T)
    E = S_H - 0.5 * M_eta_dot
    return InertialMatrices(
        M_eta=Ji.T @ M @ Ji,
        M_eta_inv=J @ params.M_inv @ J.T,
        D_H=Ji.T @ damping_body(params, nu) @ Ji,
        S_H=S_H,
        E=E,
        M_eta_dot=M_eta_dot,
        g_eta=params.restoring.gradient(eta),
        eta_dot=eta_dot,
        nu=nu,
    )


def inertia_inertial(params, eta):
    Ji = geo.kinematic_map_inverse(eta)
    return Ji.T @ params.M @ Ji


def inertial_ph_dynamics(params, x, tau_eta):
    """Vector field of the inertial pH model; returns ``[eta_dot, p_dot]``.

    ``tau_eta`` is the inertial-frame generalized force; a body-frame input
    enters as ``J^-T tau`` (see :func:`body_to_inertial_force`).
    """
    n = params.n
    x = _state_vector(x, n)
    eta, p = x[:n], x[n:]
    m = inertial_matrices(params, eta, p)
    dp = -m.g_eta - (m.E + m.D_H) @ m.eta_dot + tau_eta
    return np.concatenate([m.eta_dot, dp])


def momentum_jacobian_term(params, eta, p):
    """Matrix A with ``A[:, k] = d(J^-T)/d eta_k @ J^T p``.

    ``A @ eta_dot`` is the rate of change of ``J^-T`` applied to the fixed
    body momentum.  It enters the canonical interconnection matrix L.
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    p_b = geo.kinematic_map(eta).T @ p
    dJi = geo.kinematic_map_inverse_partials(eta)
    return np.einsum("kji,j->ik", dJi, p_b)


def interconnection_L(params, eta, p):
    """L(eta, p) = A^T - A + J^-T (C + D) J^-1 of the canonical inertial form."""
    A = momentum_jacobian_term(params, eta, p)
    Ji = geo.kinematic_map_inverse(eta)
    nu = params.M_inv @ (geo.kinematic_map(eta).T @ np.asarray(p, dtype=float))
    J2 = coriolis_body(params, nu) + damping_body(params, nu)
    return A.T - A + Ji.T @ J2 @ Ji


def hamiltonian_inertial_gradient(params, eta, p):
    """(dH_eta/deta, dH_eta/dp) of ``1/2 p^T M_eta^-1 p + P``."""
    eta = geo.check_attitude(eta)
    p = np.asarray(p, dtype=float).reshape(-1)
    J = geo.kinematic_map(eta)
    nu = params.M_inv @ (J.T @ p)
    dJ = geo.kinematic_map_partials(eta)
    d_eta = np.einsum("i,kij,j->k", p, dJ, nu) + params.restoring.gradient(eta)
    return d_eta, J @ nu


def inertial_ph_dynamics_canonical(params, x, tau_eta):
    """Same model written as ``[[0, I], [-I, -L]] grad H_eta``.

    Kept as an independent route to :func:`inertial_ph_dynamics`.
    """
    n = params.n
    x = _state_vector(x, n)
    eta, p = x[:n], x[n:]
    d_eta, d_p = hamiltonian_inertial_gradient(params, eta, p)
    L = interconnection_L(params, eta, p)
    return np.concatenate([d_p, -d_eta - L @ d_p + tau_eta])


def workless_matrix_christoffel(params, eta, eta_dot):
    """Skew matrix from Christoffel symbols of M_eta.

    ``S[k, j] = 1/2 sum_i (dM_eta[k, i]/d eta_j - dM_eta[i, j]/d eta_k) eta_dot_i``
    """
    eta_dot = np.asarray(eta_dot, dtype=float).reshape(-1)
    Ji = geo.kinematic_map_inverse(eta)
    dJi = geo.kinematic_map_inverse_partials(eta)
    M = params.M
    # dM[k] = d M_eta / d eta_k
    dM = np.einsum("kji,jl,lm->kim", dJi, M, Ji)
    dM = dM + np.transpose(dM, (0, 2, 1))
    term1 = np.einsum("jki,i->kj", dM, eta_dot)
    term2 = np.einsum("kij,i->kj", dM, eta_dot)
    return 0.5 * (term1 - term2)


def coriolis_inertial(params, eta, eta_dot):
    """C_eta = J^-T [C(J^-1 eta_dot) - M J^-1 J_dot] J^-1."""
    eta_dot = np.asarray(eta_dot, dtype=float).reshape(-1)
    Ji = geo.kinematic_map_inverse(eta)
    Jd = geo.kinematic_map_derivative(eta, eta_dot)
    nu = Ji @ eta_dot
    return Ji.T @ (coriolis_body(params, nu) - params.M @ Ji @ Jd) @ Ji


def hamiltonian_inertial(params, x):
    n = params.n
    x = _state_vector(x, n)
    eta, p = x[:n], x[n:]
    J = geo.kinematic_map(eta)
    q = J.T @ p
    return 0.5 * q @ params.M_inv @ q + params.restoring.potential(eta)


def body_to_inertial(params, x):
    """(eta, p_b) -> (eta, J^-T p_b).  Accepts arrays or :class:`BodyState`."""
    n = params.n
    v = _state_vector(x, n)
    Ji = geo.kinematic_map_inverse(v[:n])
    out = np.concatenate([v[:n], Ji.T @ v[n:]])
    return InertialState.from_vector(out) if isinstance(x, BodyState) else out


def inertial_to_body(params, x):
    n = params.n
    v = _state_vector(x, n)
    J = geo.kinematic_map(v[:n])
    out = np.concatenate([v[:n], J.T @ v[n:]])
    return BodyState.from_vector(out) if isinstance(x, InertialState) else out


def body_to_inertial_force(eta, tau):
    return geo.kinematic_map_inverse(eta).T @ np.asarray(tau, dtype=float)


def inertial_to_body_force(eta, tau_eta):
    return geo.kinematic_map(eta).T @ np.asarray(tau_eta, dtype=float)
