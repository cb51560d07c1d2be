"""Desired pose trajectories with analytic first and second derivatives.

Every reference is a callable ``ref(t) -> (eta_d, eta_d_dot, eta_d_ddot)``.
Planar paths (circle, lawnmower) are embedded in 6-DOF as constant depth
with zero roll and pitch.  Objects are immutable, so evaluation is
re-entrant.
"""
from dataclasses import dataclass

import math

import numpy as np

from .errors import ConfigError
from .geometry import check_attitude


def _embed(n, x, y, psi, depth=0.0):
    """Place planar (x, y, psi) triples into an n-vector."""
    if n == 3:
        return np.array([x, y, psi])
    return np.array([x, y, depth, 0.0, 0.0, psi])


class Reference:
    n = 3

    def __call__(self, t):
        raise NotImplementedError

    def eta_d(self, t):
        return self(t)[0]

    def eta_d_dot(self, t):
        return self(t)[1]

    def eta_d_ddot(self, t):
        return self(t)[2]

    def describe(self):
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantReference(Reference):
    eta: tuple

    def __post_init__(self):
        object.__setattr__(self, "eta", tuple(float(v) for v in self.eta))

    @property
    def n(self):
        return len(self.eta)

    def __call__(self, t):
        z = np.zeros(self.n)
        return np.array(self.eta), z, z.copy()

    def describe(self):
        return {"kind": "constant", "eta": list(self.eta)}


@dataclass(frozen=True)
class PolynomialReference(Reference):
    """Rest-to-rest quintic from ``start`` to ``end`` over ``duration`` s.

    Velocity and acceleration vanish at both ends; the pose is held at
    ``end`` afterwards.
    """

    start: tuple
    end: tuple
    duration: float
    t0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "start", tuple(float(v) for v in self.start))
        object.__setattr__(self, "end", tuple(float(v) for v in self.end))
        if len(self.start) != len(self.end):
            raise ValueError("start and end must have the same length")
        if self.duration <= 0:
            raise ValueError("duration must be positive")

    @property
    def n(self):
        return len(self.start)

    def __call__(self, t):
        a, b = np.array(self.start), np.array(self.end)
        T = self.duration
        s = min(max((t - self.t0) / T, 0.0), 1.0)
        if s in (0.0, 1.0):
            z = np.zeros(self.n)
            return (a if s == 0.0 else b).copy(), z, z.copy()
        blend = 10 * s**3 - 15 * s**4 + 6 * s**5
        dblend = (30 * s**2 - 60 * s**3 + 30 * s**4) / T
        ddblend = (60 * s - 180 * s**2 + 120 * s**3) / T**2
        d = b - a
        return a + blend * d, dblend * d, ddblend * d

    def describe(self):
        return {"kind": "polynomial", "start": list(self.start),
                "end": list(self.end), "duration": self.duration, "t0": self.t0}


@dataclass(frozen=True)
class CircleReference(Reference):
    """Constant-speed circle with the heading tangent to the path."""

    radius: float
    period: float
    center: tuple = (0.0, 0.0)
    phase: float = 0.0
    depth: float = 0.0
    dof: int = 3

    @property
    def n(self):
        return self.dof

    def __call__(self, t):
        R, w = self.radius, 2.0 * math.pi / self.period
        a = w * t + self.phase
        c, s = math.cos(a), math.sin(a)
        cx, cy = self.center
        heading = a + math.copysign(math.pi / 2, w)
        pos = _embed(self.n, cx + R * c, cy + R * s, heading, self.depth)
        vel = _embed(self.n, -R * w * s, R * w * c, w, 0.0)
        acc = _embed(self.n, -R * w**2 * c, -R * w**2 * s, 0.0, 0.0)
        return pos, vel, acc

    def describe(self):
        return {"kind": "circle", "radius": self.radius, "period": self.period,
                "center": list(self.center), "phase": self.phase,
                "depth": self.depth, "dof": self.dof}


@dataclass(frozen=True)
class LawnmowerReference(Reference):
    """Sinusoidal sweep: x advances at ``speed``, y oscillates, heading follows.

    ``x = x0 + speed t``, ``y = y0 + amplitude sin(2 pi t / period)``,
    ``psi = atan2(y_dot, x_dot)``.
    """

    speed: float
    amplitude: float
    period: float
    origin: tuple = (0.0, 0.0)
    depth: float = 0.0
    dof: int = 3

    def __post_init__(self):
        if self.speed <= 0:
            raise ValueError("lawnmower speed must be positive")

    @property
    def n(self):
        return self.dof

    def __call__(self, t):
        v, A = self.speed, self.amplitude
        w = 2.0 * math.pi / self.period
        s, c = math.sin(w * t), math.cos(w * t)
        x0, y0 = self.origin
        b = A * w * c          # y_dot
        db = -A * w**2 * s     # y_ddot
        ddb = -A * w**3 * c    # y_dddot
        q = v**2 + b**2
        psi = math.atan2(b, v)
        dpsi = v * db / q
        ddpsi = v * (ddb * q - 2.0 * b * db**2) / q**2
        pos = _embed(self.n, x0 + v * t, y0 + A * s, psi, self.depth)
        vel = _embed(self.n, v, b, dpsi, 0.0)
        acc = _embed(self.n, 0.0, db, ddpsi, 0.0)
        return pos, vel, acc

    def describe(self):
        return {"kind": "lawnmower", "speed": self.speed,
                "amplitude": self.amplitude, "period": self.period,
                "origin": list(self.origin), "depth": self.depth,
                "dof": self.dof}


@dataclass(frozen=True)
class SinusoidReference(Reference):
    """Per-axis sinusoids ``offset + amplitude * sin(2 pi t / period + phase)``."""

    amplitude: tuple
    period: float
    offset: tuple = None
    phase: tuple = None

    def __post_init__(self):
        n = len(self.amplitude)
        object.__setattr__(self, "amplitude", tuple(float(v) for v in self.amplitude))
        for name in ("offset", "phase"):
            val = getattr(self, name)
            object.__setattr__(self, name, tuple(0.0 for _ in range(n)) if val is None
                               else tuple(float(v) for v in val))

    @property
    def n(self):
        return len(self.amplitude)

    def __call__(self, t):
        A = np.array(self.amplitude)
        w = 2.0 * np.pi / self.period
        arg = w * t + np.array(self.phase)
        s, c = np.sin(arg), np.cos(arg)
        return np.array(self.offset) + A * s, A * w * c, -A * w**2 * s

    def describe(self):
        return {"kind": "sinusoid", "amplitude": list(self.amplitude),
                "period": self.period, "offset": list(self.offset),
                "phase": list(self.phase)}


REFERENCE_KINDS = {
    "constant": ConstantReference,
    "polynomial": PolynomialReference,
    "circle": CircleReference,
    "lawnmower": LawnmowerReference,
    "sinusoid": SinusoidReference,
}


def make_reference(spec):
    """Build a reference from a ``{"kind": ..., **params}`` mapping."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    try:
        cls = REFERENCE_KINDS[kind]
    except KeyError:
        raise ValueError(
            f"unknown reference kind {kind!r}; choose one of {sorted(REFERENCE_KINDS)}"
        ) from None
    for key in ("center", "origin", "eta", "start", "end", "amplitude", "offset", "phase"):
        if key in spec and isinstance(spec[key], list):
            spec[key] = tuple(spec[key])
    return cls(**spec)


def check_reference(ref, t_end, samples=41, h=1e-5, rtol=1e-5):
    """Sanity-check analytic derivatives against central differences.

    Also rejects references that enter the pitch singularity band.  Raises
    :class:`ConfigError` on the first failing sample.
    """
    for t in np.linspace(h, max(t_end, 2 * h) - h, samples):
        e, de, dde = ref(t)
        ep, dep, _ = ref(t + h)
        em, dem, _ = ref(t - h)
        fd1 = (ep - em) / (2 * h)
        fd2 = (dep - dem) / (2 * h)
        for name, a, b in (("eta_d_dot", de, fd1), ("eta_d_ddot", dde, fd2)):
            scale = max(1.0, float(np.abs(a).max()))
            if np.abs(a - b).max() > rtol * scale:
                raise ConfigError(
                    f"reference {name} disagrees with finite differences at t={t:.9g}")
        try:
            check_attitude(e)
        except ValueError:
            raise ConfigError(f"reference enters the attitude singularity at t={t:.9g}") from None
