"""Euler-angle kinematics for planar (surge, sway, yaw) and 6-DOF craft.

A pose vector ``eta`` is ``[x, y, psi]`` for 3-DOF craft and
``[x, y, z, phi, theta, psi]`` for 6-DOF craft.  The attitude uses the
ZYX (roll-pitch-yaw) convention, so the body-to-NED rotation is
``Rz(psi) @ Ry(theta) @ Rx(phi)`` and angular rates go through the usual
Euler-rate transformation ``T(phi, theta)``.

All functions accept either a :class:`Pose` or a plain array and never
mutate their inputs.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import SingularAttitude

THETA_GUARD = 1e-3  # rad, half-width of the rejected band around theta = +-pi/2


class Dof(str, Enum):
    PLANAR3 = "planar3"
    FULL6 = "full6"

    @property
    def n(self):
        return 3 if self is Dof.PLANAR3 else 6

    @classmethod
    def from_size(cls, n):
        if n == 3:
            return cls.PLANAR3
        if n == 6:
            return cls.FULL6
        raise ValueError(f"pose dimension must be 3 or 6, got {n}")


def wrap_angle(a):
    """Wrap angles to the half-open interval (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(a, dtype=float), 2.0 * np.pi)


def attitude_slice(n):
    return slice(2, 3) if n == 3 else slice(3, 6)


def wrap_pose(eta):
    """Copy of ``eta`` with its attitude entries wrapped."""
    eta = np.array(eta, dtype=float)
    s = attitude_slice(eta.size)
    eta[s] = wrap_angle(eta[s])
    return eta


@dataclass(frozen=True)
class Pose:
    """Position (m) and Euler attitude (rad) in the NED frame."""

    dof: Dof
    position: np.ndarray
    attitude: np.ndarray

    def __post_init__(self):
        dof = Dof(self.dof)
        pos = np.array(self.position, dtype=float).reshape(-1)
        att = wrap_angle(np.array(self.attitude, dtype=float).reshape(-1))
        npos, natt = (2, 1) if dof is Dof.PLANAR3 else (3, 3)
        if pos.size != npos or att.size != natt:
            raise ValueError(
                f"{dof.value} pose needs {npos} position and {natt} attitude entries"
            )
        object.__setattr__(self, "dof", dof)
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "attitude", att)

    @classmethod
    def from_vector(cls, eta):
        eta = np.asarray(eta, dtype=float).reshape(-1)
        dof = Dof.from_size(eta.size)
        s = attitude_slice(eta.size)
        return cls(dof, eta[: s.start], eta[s])

    @property
    def vector(self):
        return np.concatenate([self.position, self.attitude])

    def __array__(self, dtype=None, copy=None):
        v = self.vector
        return v if dtype is None else v.astype(dtype)


@dataclass(frozen=True)
class BodyVelocity:
    """Body-frame linear (m/s) and angular (rad/s) velocity."""

    linear: np.ndarray
    angular: np.ndarray

    def __post_init__(self):
        lin = np.array(self.linear, dtype=float).reshape(-1)
        ang = np.array(self.angular, dtype=float).reshape(-1)
        if (lin.size, ang.size) not in ((2, 1), (3, 3)):
            raise ValueError("body velocity must be (u, v | r) or (u, v, w | p, q, r)")
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "angular", ang)

    @classmethod
    def from_vector(cls, nu):
        nu = np.asarray(nu, dtype=float).reshape(-1)
        k = 2 if nu.size == 3 else 3
        return cls(nu[:k], nu[k:])

    @property
    def vector(self):
        return np.concatenate([self.linear, self.angular])

    def __array__(self, dtype=None, copy=None):
        v = self.vector
        return v if dtype is None else v.astype(dtype)


def _as_vec(eta):
    v = np.asarray(eta, dtype=float).reshape(-1)
    if v.size not in (3, 6):
        raise ValueError(f"pose dimension must be 3 or 6, got {v.size}")
    return v


def check_attitude(eta, guard=THETA_GUARD):
    """Raise :class:`SingularAttitude` if the pitch sits in the guard band."""
    eta = _as_vec(eta)
    if eta.size == 6 and abs(np.cos(eta[4])) < np.sin(guard):
        raise SingularAttitude(
            f"pitch {eta[4]:.6g} rad is within {guard:g} rad of +-pi/2"
        )
    return eta


def skew(a):
    """Cross-product matrix: ``skew(a) @ b == np.cross(a, b)``."""
    a1, a2, a3 = np.asarray(a, dtype=float).reshape(3)
    return np.array([[0.0, -a3, a2], [a3, 0.0, -a1], [-a2, a1, 0.0]])


def _rot_z(psi):
    c, s = np.cos(psi), np.sin(psi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rot_y(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rot_x(phi):
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_zyx(phi, theta, psi):
    """Body-to-NED rotation matrix for ZYX Euler angles."""
    return _rot_z(psi) @ _rot_y(theta) @ _rot_x(phi)


def euler_rate_matrix(phi, theta):
    """T such that d/dt [phi, theta, psi] = T @ [p, q, r]."""
    sf, cf = np.sin(phi), np.cos(phi)
    ct, tt = np.cos(theta), np.tan(theta)
    return np.array([
        [1.0, sf * tt, cf * tt],
        [0.0, cf, -sf],
        [0.0, sf / ct, cf / ct],
    ])


def euler_rate_matrix_inverse(phi, theta):
    sf, cf = np.sin(phi), np.cos(phi)
    st, ct = np.sin(theta), np.cos(theta)
    return np.array([
        [1.0, 0.0, -st],
        [0.0, cf, ct * sf],
        [0.0, -sf, ct * cf],
    ])


def kinematic_map(eta):
    """J(eta) with ``eta_dot = J(eta) @ nu``."""
    eta = check_attitude(eta)
    if eta.size == 3:
        return _rot_z(eta[2])
    phi, theta, psi = eta[3:]
    J = np.zeros((6, 6))
    J[:3, :3] = rotation_zyx(phi, theta, psi)
    J[3:, 3:] = euler_rate_matrix(phi, theta)
    return J


def kinematic_map_inverse(eta):
    """Closed-form J(eta)^-1."""
    eta = check_attitude(eta)
    if eta.size == 3:
        return _rot_z(eta[2]).T
    phi, theta, psi = eta[3:]
    Ji = np.zeros((6, 6))
    Ji[:3, :3] = rotation_zyx(phi, theta, psi).T
    Ji[3:, 3:] = euler_rate_matrix_inverse(phi, theta)
    return Ji


def kinematic_map_partials(eta):
    """Stack ``dJ[k] = dJ/d eta_k`` of shape (n, n, n).

    Only attitude coordinates contribute; position slices are zero.
    """
    eta = check_attitude(eta)
    n = eta.size
    dJ = np.zeros((n, n, n))
    if n == 3:
        c, s = np.cos(eta[2]), np.sin(eta[2])
        dJ[2, :2, :2] = [[-s, -c], [c, -s]]
        return dJ

    phi, theta, psi = eta[3:]
    Rz, Ry, Rx = _rot_z(psi), _rot_y(theta), _rot_x(phi)
    R = Rz @ Ry @ Rx
    e1, e2, e3 = np.eye(3)
    dJ[3, :3, :3] = R @ skew(e1)
    dJ[4, :3, :3] = Rz @ Ry @ skew(e2) @ Rx
    dJ[5, :3, :3] = skew(e3) @ R

    sf, cf = np.sin(phi), np.cos(phi)
    st, ct, tt = np.sin(theta), np.cos(theta), np.tan(theta)
    sec2 = 1.0 / ct**2
    dJ[3, 3:, 3:] = [
        [0.0, cf * tt, -sf * tt],
        [0.0, -sf, -cf],
        [0.0, cf / ct, -sf / ct],
    ]
    dJ[4, 3:, 3:] = [
        [0.0, sf * sec2, cf * sec2],
        [0.0, 0.0, 0.0],
        [0.0, sf * st * sec2, cf * st * sec2],
    ]
    return dJ


def kinematic_map_inverse_partials(eta):
    """Stack of d(J^-1)/d eta_k, via d(J^-1) = -J^-1 dJ J^-1."""
    Ji = kinematic_map_inverse(eta)
    dJ = kinematic_map_partials(eta)
    return -np.einsum("ij,kjl,lm->kim", Ji, dJ, Ji)


def kinematic_map_derivative(eta, eta_dot):
    """Time derivative of J along ``eta_dot``, by the chain rule."""
    eta_dot = np.asarray(eta_dot, dtype=float).reshape(-1)
    return np.tensordot(eta_dot, kinematic_map_partials(eta), axes=1)


def kinematic_map_inverse_derivative(eta, eta_dot):
    eta_dot = np.asarray(eta_dot, dtype=float).reshape(-1)
    return np.tensordot(eta_dot, kinematic_map_inverse_partials(eta), axes=1)


def pose_rate(eta, nu):
    """eta_dot = J(eta) @ nu."""
    return kinematic_map(eta) @ np.asarray(nu, dtype=float).reshape(-1)
