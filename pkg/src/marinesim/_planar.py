"""Scalar fast path for 3-DOF closed and open loops.

Small-matrix numpy calls cost about a microsecond each, which dominates
long fixed-step runs of a 3-state craft.  These kernels evaluate the same
body and inertial closed-loop vector fields as :mod:`marinesim.control`
with plain float arithmetic.  The test suite checks them against the
general implementation.  With the virtual state equal to the actual one
the restoring terms cancel exactly, so no potential appears below.
"""
import math

import numpy as np

_TWO_PI = 2.0 * math.pi


def _wrap(a):
    return math.pi - (math.pi - a) % _TWO_PI


def _mat(A):
    return tuple(tuple(float(v) for v in row) for row in np.asarray(A))


class PlanarKernel:
    """Precomputed float constants for one (params, gains, ref) triple."""

    def __init__(self, params, gains, ref):
        if params.n != 3:
            raise ValueError("planar kernel needs a 3-DOF craft")
        self.params = params
        self.ref = ref
        self.M = _mat(params.M)
        self.Mi = _mat(params.M_inv)
        self.dl = tuple(float(v) for v in params.d_lin)
        self.dq = _mat(params.d_quad)
        self.L = _mat(gains.Lambda)
        self.P = _mat(gains.Pi)
        self.K = _mat(gains.Kd)
        self._t = None
        self._r = None

    def _ref(self, t):
        # paired runs evaluate several copies at one stage time
        if t != self._t:
            ed, ded, dded = self.ref(t)
            self._r = (ed.tolist(), ded.tolist(), dded.tolist())
            self._t = t
        return self._r

    def body(self, t, x):
        """``[eta_dot, p_b_dot]`` of the body-frame closed loop."""
        return self.body_virtual(t, x, x)

    def inertial(self, t, x):
        """``[eta_dot, p_dot]`` of the inertial-frame closed loop."""
        return self.inertial_virtual(t, x, x)

    def body_virtual(self, t, xv, x):
        """Body-frame virtual closed loop at ``xv`` frozen along actual ``x``."""
        (M11, M12, M13), (M21, M22, M23), (M31, M32, M33) = self.M
        (N11, N12, N13), (N21, N22, N23), (N31, N32, N33) = self.Mi
        (L11, L12, L13), (L21, L22, L23), (L31, L32, L33) = self.L
        (P11, P12, P13), (P21, P22, P23), (P31, P32, P33) = self.P
        (K11, K12, K13), (K21, K22, K23), (K31, K32, K33) = self.K
        dl1, dl2, dl3 = self.dl
        (q11, q12, q13), (q21, q22, q23), (q31, q32, q33) = self.dq

        _, _, psi, px, py, pz = x.tolist()
        X, Y, psv, qx, qy, qz = xv.tolist()
        c, s = math.cos(psi), math.sin(psi)
        u = N11 * px + N12 * py + N13 * pz
        v = N21 * px + N22 * py + N23 * pz
        r = N31 * px + N32 * py + N33 * pz
        uv = N11 * qx + N12 * qy + N13 * qz
        vv = N21 * qx + N22 * qy + N23 * qz
        rv = N31 * qx + N32 * qy + N33 * qz
        xd = c * uv - s * vv
        yd = s * uv + c * vv

        (ed1, ed2, ed3), (de1, de2, de3), (dd1, dd2, dd3) = self._ref(t)
        e1, e2, e3 = X - ed1, Y - ed2, _wrap(psv - ed3)

        vr1 = de1 - (L11 * e1 + L12 * e2 + L13 * e3)
        vr2 = de2 - (L21 * e1 + L22 * e2 + L23 * e3)
        vr3 = de3 - (L31 * e1 + L32 * e2 + L33 * e3)
        f1, f2, f3 = xd - de1, yd - de2, rv - de3
        a1 = dd1 - (L11 * f1 + L12 * f2 + L13 * f3)
        a2 = dd2 - (L21 * f1 + L22 * f2 + L23 * f3)
        a3 = dd3 - (L31 * f1 + L32 * f2 + L33 * f3)

        # J^-1 v_r and d(J^-1)/dt v_r + J^-1 a
        b1 = c * vr1 + s * vr2
        b2 = -s * vr1 + c * vr2
        b3 = vr3
        g1 = r * (-s * vr1 + c * vr2) + c * a1 + s * a2
        g2 = r * (-c * vr1 - s * vr2) - s * a1 + c * a2
        g3 = a3
        pr1 = M11 * b1 + M12 * b2 + M13 * b3
        pr2 = M21 * b1 + M22 * b2 + M23 * b3
        pr3 = M31 * b1 + M32 * b2 + M33 * b3
        prd1 = M11 * g1 + M12 * g2 + M13 * g3
        prd2 = M21 * g1 + M22 * g2 + M23 * g3
        prd3 = M31 * g1 + M32 * g2 + M33 * g3
        s1, s2, s3 = qx - pr1, qy - pr2, qz - pr3

        au, av, ar = abs(u), abs(v), abs(r)
        D1 = dl1 + q11 * au + q12 * av + q13 * ar
        D2 = dl2 + q21 * au + q22 * av + q23 * ar
        D3 = dl3 + q31 * au + q32 * av + q33 * ar

        # (C + D) (nu_r - nu_v), C = [[0,0,-py],[0,0,px],[py,-px,0]] since M nu = p
        w1, w2, w3 = b1 - uv, b2 - vv, b3 - rv
        h1 = -py * w3 + D1 * w1
        h2 = px * w3 + D2 * w2
        h3 = py * w1 - px * w2 + D3 * w3

        # J^T Pi e and Kd M^-1 sigma
        k1 = P11 * e1 + P12 * e2 + P13 * e3
        k2 = P21 * e1 + P22 * e2 + P23 * e3
        k3 = P31 * e1 + P32 * e2 + P33 * e3
        m1 = N11 * s1 + N12 * s2 + N13 * s3
        m2 = N21 * s1 + N22 * s2 + N23 * s3
        m3 = N31 * s1 + N32 * s2 + N33 * s3

        dp1 = prd1 + h1 - (c * k1 + s * k2) - (K11 * m1 + K12 * m2 + K13 * m3)
        dp2 = prd2 + h2 - (-s * k1 + c * k2) - (K21 * m1 + K22 * m2 + K23 * m3)
        dp3 = prd3 + h3 - k3 - (K31 * m1 + K32 * m2 + K33 * m3)
        return np.array((xd, yd, rv, dp1, dp2, dp3))

    def inertial_virtual(self, t, xv, x):
        """Inertial-frame virtual closed loop at ``xv`` frozen along actual ``x``."""
        (M11, M12, M13), (M21, M22, M23), (M31, M32, M33) = self.M
        (N11, N12, N13), (N21, N22, N23), (N31, N32, N33) = self.Mi
        (L11, L12, L13), (L21, L22, L23), (L31, L32, L33) = self.L
        (P11, P12, P13), (P21, P22, P23), (P31, P32, P33) = self.P
        (K11, K12, K13), (K21, K22, K23), (K31, K32, K33) = self.K
        dl1, dl2, dl3 = self.dl
        (q11, q12, q13), (q21, q22, q23), (q31, q32, q33) = self.dq

        _, _, psi, p1, p2, p3 = x.tolist()
        X, Y, psv, q1, q2, q3 = xv.tolist()
        c, s = math.cos(psi), math.sin(psi)
        # actual body momentum and velocity
        bx = c * p1 + s * p2
        by = -s * p1 + c * p2
        bz = p3
        u = N11 * bx + N12 * by + N13 * bz
        v = N21 * bx + N22 * by + N23 * bz
        r = N31 * bx + N32 * by + N33 * bz

        (ed1, ed2, ed3), (de1, de2, de3), (dd1, dd2, dd3) = self._ref(t)
        e1, e2, e3 = X - ed1, Y - ed2, _wrap(psv - ed3)
        vr1 = de1 - (L11 * e1 + L12 * e2 + L13 * e3)
        vr2 = de2 - (L21 * e1 + L22 * e2 + L23 * e3)
        vr3 = de3 - (L31 * e1 + L32 * e2 + L33 * e3)

        # M_eta w = R M R^T w for planar craft
        def meta(w1, w2, w3):
            z1 = c * w1 + s * w2
            z2 = -s * w1 + c * w2
            y1 = M11 * z1 + M12 * z2 + M13 * w3
            y2 = M21 * z1 + M22 * z2 + M23 * w3
            y3 = M31 * z1 + M32 * z2 + M33 * w3
            return c * y1 - s * y2, s * y1 + c * y2, y3

        def meta_inv(w1, w2, w3):
            z1 = c * w1 + s * w2
            z2 = -s * w1 + c * w2
            y1 = N11 * z1 + N12 * z2 + N13 * w3
            y2 = N21 * z1 + N22 * z2 + N23 * w3
            y3 = N31 * z1 + N32 * z2 + N33 * w3
            return c * y1 - s * y2, s * y1 + c * y2, y3

        # X_mat = J^-T M d(J^-1)/dt; d(J^-1)/dt w = r [-s w1 + c w2, -c w1 - s w2, 0]
        def xmat(w1, w2, w3):
            z1 = r * (-s * w1 + c * w2)
            z2 = r * (-c * w1 - s * w2)
            y1 = M11 * z1 + M12 * z2
            y2 = M21 * z1 + M22 * z2
            y3 = M31 * z1 + M32 * z2
            return c * y1 - s * y2, s * y1 + c * y2, y3

        def xmat_t(w1, w2, w3):
            # X^T w = d(J^-T)/dt M J^-1 w
            z1 = c * w1 + s * w2
            z2 = -s * w1 + c * w2
            y1 = M11 * z1 + M12 * z2 + M13 * w3
            y2 = M21 * z1 + M22 * z2 + M23 * w3
            return r * (-s * y1 - c * y2), r * (c * y1 - s * y2), 0.0

        xd, yd, rv = meta_inv(q1, q2, q3)
        f1, f2, f3 = xd - de1, yd - de2, rv - de3
        a1 = dd1 - (L11 * f1 + L12 * f2 + L13 * f3)
        a2 = dd2 - (L21 * f1 + L22 * f2 + L23 * f3)
        a3 = dd3 - (L31 * f1 + L32 * f2 + L33 * f3)

        pr1, pr2, pr3 = meta(vr1, vr2, vr3)
        m1, m2, m3 = xmat(vr1, vr2, vr3)
        n1, n2, n3 = xmat_t(vr1, vr2, vr3)
        o1, o2, o3 = meta(a1, a2, a3)
        prd1, prd2, prd3 = m1 + n1 + o1, m2 + n2 + o2, m3 + n3 + o3
        s1, s2, s3 = q1 - pr1, q2 - pr2, q3 - pr3

        au, av, ar = abs(u), abs(v), abs(r)
        D1 = dl1 + q11 * au + q12 * av + q13 * ar
        D2 = dl2 + q21 * au + q22 * av + q23 * ar
        D3 = dl3 + q31 * au + q32 * av + q33 * ar

        # (E + D_H) w with E = J^-T C J^-1 - X^T, D_H = J^-T D J^-1, w = M_eta^-1 p_r - eta_v_dot
        w1, w2, w3 = meta_inv(pr1, pr2, pr3)
        w1, w2, w3 = w1 - xd, w2 - yd, w3 - rv
        z1 = c * w1 + s * w2
        z2 = -s * w1 + c * w2
        z3 = w3
        y1 = -by * z3 + D1 * z1
        y2 = bx * z3 + D2 * z2
        y3 = by * z1 - bx * z2 + D3 * z3
        t1, t2, t3 = xmat_t(w1, w2, w3)
        h1 = c * y1 - s * y2 - t1
        h2 = s * y1 + c * y2 - t2
        h3 = y3 - t3

        k1, k2, k3 = meta_inv(s1, s2, s3)
        dp1 = prd1 + h1 - (P11 * e1 + P12 * e2 + P13 * e3) - (K11 * k1 + K12 * k2 + K13 * k3)
        dp2 = prd2 + h2 - (P21 * e1 + P22 * e2 + P23 * e3) - (K21 * k1 + K22 * k2 + K23 * k3)
        dp3 = prd3 + h3 - (P31 * e1 + P32 * e2 + P33 * e3) - (K31 * k1 + K32 * k2 + K33 * k3)
        return np.array((xd, yd, rv, dp1, dp2, dp3))


def _rot_t(psi):
    c, s = math.cos(psi), math.sin(psi)
    return np.array(((c, s, 0.0), (-s, c, 0.0), (0.0, 0.0, 1.0)))


class PlanarPlant:
    """Open-loop body and inertial vector fields of a 3-DOF craft."""

    def __init__(self, params):
        if params.n != 3:
            raise ValueError("planar plant needs a 3-DOF craft")
        self.params = params
        self.Mi = _mat(params.M_inv)
        self.M = _mat(params.M)
        self.dl = tuple(float(v) for v in params.d_lin)
        self.dq = _mat(params.d_quad)
        restoring = params.restoring
        self._grad = None if type(restoring).__name__ == "NoRestoring" else restoring.gradient

    def _damping(self, u, v, r):
        (q11, q12, q13), (q21, q22, q23), (q31, q32, q33) = self.dq
        dl1, dl2, dl3 = self.dl
        au, av, ar = abs(u), abs(v), abs(r)
        return (dl1 + q11 * au + q12 * av + q13 * ar,
                dl2 + q21 * au + q22 * av + q23 * ar,
                dl3 + q31 * au + q32 * av + q33 * ar)

    def body(self, x, tau):
        """``[eta_dot, p_b_dot]`` for body-frame force ``tau``."""
        (N11, N12, N13), (N21, N22, N23), (N31, N32, N33) = self.Mi
        _, _, psi, px, py, pz = x.tolist()
        t1, t2, t3 = tau.tolist()
        c, s = math.cos(psi), math.sin(psi)
        u = N11 * px + N12 * py + N13 * pz
        v = N21 * px + N22 * py + N23 * pz
        r = N31 * px + N32 * py + N33 * pz
        D1, D2, D3 = self._damping(u, v, r)
        # C(nu) nu with M nu = p
        dp = np.array((py * r - D1 * u + t1,
                       -px * r - D2 * v + t2,
                       px * v - py * u - D3 * r + t3))
        out = np.empty(6)
        out[0], out[1], out[2] = c * u - s * v, s * u + c * v, r
        if self._grad is not None:
            dp -= _rot_t(psi) @ self._grad(x[:3])
        out[3:] = dp
        return out

    def inertial(self, x, tau_eta):
        """``[eta_dot, p_dot]`` for inertial-frame force ``tau_eta``."""
        (M11, M12, M13), (M21, M22, M23), (M31, M32, M33) = self.M
        (N11, N12, N13), (N21, N22, N23), (N31, N32, N33) = self.Mi
        _, _, psi, p1, p2, p3 = x.tolist()
        t1, t2, t3 = tau_eta.tolist()
        c, s = math.cos(psi), math.sin(psi)
        bx = c * p1 + s * p2
        by = -s * p1 + c * p2
        bz = p3
        u = N11 * bx + N12 * by + N13 * bz
        v = N21 * bx + N22 * by + N23 * bz
        r = N31 * bx + N32 * by + N33 * bz
        D1, D2, D3 = self._damping(u, v, r)
        # (J C J^T + J D J^T) eta_dot = J (C + D) nu
        y1 = -by * r + D1 * u
        y2 = bx * r + D2 * v
        y3 = by * u - bx * v + D3 * r
        # X^T eta_dot = d(J^-T)/dt M nu with M nu = b
        z1 = r * (-s * bx - c * by)
        z2 = r * (c * bx - s * by)
        dp = np.array((-(c * y1 - s * y2 - z1) + t1,
                       -(s * y1 + c * y2 - z2) + t2,
                       -y3 + t3))
        if self._grad is not None:
            dp -= self._grad(x[:3])
        out = np.empty(6)
        out[0], out[1], out[2] = c * u - s * v, s * u + c * v, r
        out[3:] = dp
        return out
