"""Convex sets used by the trajectory problem, with membership and projections.

The projection arithmetic lives in small compiled kernels that act in place on
a 3-vector slice ``x[o:o+3]``; the solver calls them directly on the stacked
primal vector, and the public functions below wrap them for single points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

# block kinds understood by ``project_blocks``
SINGLETON = 0
CYLINDER = 1
BALL = 2
THRUST = 3
N_BLOCK_PARAMS = 8


@njit(cache=True)
def _cylinder_inplace(x, o, c0, c1, c2, d0, d1, d2, rho, eta):
    s0 = x[o] - c0
    s1 = x[o + 1] - c1
    s2 = x[o + 2] - c2
    a = d0 * s0 + d1 * s1 + d2 * s2
    b0 = s0 - a * d0
    b1 = s1 - a * d1
    b2 = s2 - a * d2
    nb = math.sqrt(b0 * b0 + b1 * b1 + b2 * b2)
    scale = rho / max(nb, rho)
    a = max(-eta, min(eta, a))
    x[o] = c0 + a * d0 + scale * b0
    x[o + 1] = c1 + a * d1 + scale * b1
    x[o + 2] = c2 + a * d2 + scale * b2


@njit(cache=True)
def _ball_inplace(x, o, radius):
    nrm = math.sqrt(x[o] * x[o] + x[o + 1] * x[o + 1] + x[o + 2] * x[o + 2])
    if nrm > radius:
        s = radius / nrm
        x[o] *= s
        x[o + 1] *= s
        x[o + 2] *= s


@njit(cache=True)
def _thrust_inplace(x, o, gamma_hi, cos_t, sin_t):
    u0 = x[o]
    u1 = x[o + 1]
    u2 = x[o + 2]
    nrm = math.sqrt(u0 * u0 + u1 * u1 + u2 * u2)
    if cos_t * nrm <= u2:
        pass
    elif sin_t * nrm <= -u2:
        u0 = 0.0
        u1 = 0.0
        u2 = 0.0
    else:
        h = math.sqrt(u0 * u0 + u1 * u1)
        if h > 0.0:
            b0 = sin_t * u0 / h
            b1 = sin_t * u1 / h
            b2 = cos_t
            ip = u0 * b0 + u1 * b1 + u2 * b2
            u0 = ip * b0
            u1 = ip * b1
            u2 = ip * b2
        else:
            u0 = 0.0
            u1 = 0.0
            u2 = max(u2, 0.0)
    nrm = math.sqrt(u0 * u0 + u1 * u1 + u2 * u2)
    s = gamma_hi / max(gamma_hi, nrm)
    x[o] = s * u0
    x[o + 1] = s * u1
    x[o + 2] = s * u2


@njit(cache=True)
def project_blocks(x, kinds, params):
    """Project every 3-vector block of ``x`` onto its set, in place.

    ``kinds[j]`` selects the set for ``x[3j:3j+3]``; ``params[j]`` holds its
    data (point; center, axis, radius, half-length; radius; cap, cos, sin).
    """
    for j in range(kinds.shape[0]):
        o = 3 * j
        k = kinds[j]
        p = params[j]
        if k == CYLINDER:
            _cylinder_inplace(x, o, p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7])
        elif k == BALL:
            _ball_inplace(x, o, p[0])
        elif k == THRUST:
            _thrust_inplace(x, o, p[0], p[1], p[2])
        else:
            x[o] = p[0]
            x[o + 1] = p[1]
            x[o + 2] = p[2]


@njit(cache=True)
def project_polar_inplace(y, p):
    for i in range(p, y.shape[0]):
        if y[i] > 0.0:
            y[i] = 0.0


def _point(x) -> np.ndarray:
    arr = np.array(x, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class Corridor:
    """Finite cylinder: ``center + s`` with radial distance <= radius and
    axial coordinate within +/- half_length along the unit ``axis``."""

    center: np.ndarray
    axis: np.ndarray
    radius: float
    half_length: float

    def __post_init__(self):
        c = _point(self.center)
        d = _point(self.axis)
        if abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise ValueError(f"corridor axis must be a unit vector, got norm {np.linalg.norm(d)}")
        if not (self.radius > 0 and self.half_length > 0):
            raise ValueError("corridor radius and half_length must be positive")
        c.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "axis", d)
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "half_length", float(self.half_length))

    @property
    def start(self) -> np.ndarray:
        return self.center - self.half_length * self.axis

    @property
    def end(self) -> np.ndarray:
        return self.center + self.half_length * self.axis

    def block_params(self) -> np.ndarray:
        return np.concatenate([self.center, self.axis, [self.radius, self.half_length]])

    def slack(self, x) -> float:
        s = _point(x) - self.center
        a = float(self.axis @ s)
        radial = float(np.linalg.norm(s - a * self.axis))
        return min(self.radius - radial, self.half_length - abs(a))

    def contains(self, x, tol: float = 0.0) -> bool:
        return self.slack(x) >= -tol

    def project(self, x) -> np.ndarray:
        return project_cylinder(x, self)


@dataclass(frozen=True)
class BallSet:
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    def block_params(self) -> np.ndarray:
        out = np.zeros(N_BLOCK_PARAMS)
        out[0] = self.radius
        return out

    def slack(self, x) -> float:
        return self.radius - float(np.linalg.norm(_point(x)))

    def contains(self, x, tol: float = 0.0) -> bool:
        return self.slack(x) >= -tol

    def project(self, x) -> np.ndarray:
        return project_ball(x, self.radius)


@dataclass(frozen=True)
class ThrustCap:
    """Thrusts with magnitude at most ``gamma_hi`` tilted at most ``tilt``
    from the vertical."""

    gamma_hi: float
    tilt: float

    def __post_init__(self):
        if not self.gamma_hi > 0:
            raise ValueError("gamma_hi must be positive")
        if not 0.0 <= self.tilt <= math.pi / 2:
            raise ValueError("tilt must lie in [0, pi/2]")

    def block_params(self) -> np.ndarray:
        out = np.zeros(N_BLOCK_PARAMS)
        out[:3] = self.gamma_hi, math.cos(self.tilt), math.sin(self.tilt)
        return out

    def slacks(self, x) -> tuple[float, float]:
        """(ball slack, cone slack)."""
        u = _point(x)
        nrm = float(np.linalg.norm(u))
        return self.gamma_hi - nrm, float(u[2]) - math.cos(self.tilt) * nrm

    def slack(self, x) -> float:
        return min(self.slacks(x))

    def contains(self, x, tol: float = 0.0) -> bool:
        return self.slack(x) >= -tol

    def project(self, x) -> np.ndarray:
        return project_thrust(x, self)


@dataclass(frozen=True, eq=False)
class Singleton:
    point: np.ndarray

    def __post_init__(self):
        p = _point(self.point)
        p.setflags(write=False)
        object.__setattr__(self, "point", p)

    def block_params(self) -> np.ndarray:
        out = np.zeros(N_BLOCK_PARAMS)
        out[:3] = self.point
        return out

    def slack(self, x) -> float:
        return -float(np.max(np.abs(_point(x) - self.point)))

    def contains(self, x, tol: float = 0.0) -> bool:
        return self.slack(x) >= -tol

    def project(self, x) -> np.ndarray:
        return project_singleton(x, self)


@dataclass(frozen=True)
class ConeSpec:
    """``K = {0}^zero x R_+^nonneg``."""

    zero: int
    nonneg: int

    def __post_init__(self):
        if self.zero < 0 or self.nonneg < 0:
            raise ValueError("cone block sizes must be non-negative")

    @property
    def dim(self) -> int:
        return self.zero + self.nonneg

    def _check(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}, got shape {y.shape}")
        return y

    def slack(self, y) -> float:
        y = self._check(y)
        worst = np.inf
        if self.zero:
            worst = -float(np.max(np.abs(y[: self.zero])))
        if self.nonneg:
            worst = min(worst, float(np.min(y[self.zero :])))
        return worst

    def contains(self, y, tol: float = 0.0) -> bool:
        return self.slack(y) >= -tol

    @property
    def polar(self) -> PolarCone:
        return PolarCone(self)


@dataclass(frozen=True)
class PolarCone:
    """Polar of a ``ConeSpec``: free on the zero block, non-positive after."""

    cone: ConeSpec

    def slack(self, y) -> float:
        y = self.cone._check(y)
        if not self.cone.nonneg:
            return np.inf
        return -float(np.max(y[self.cone.zero :]))

    def contains(self, y, tol: float = 0.0) -> bool:
        return self.slack(y) >= -tol

    def project(self, y) -> np.ndarray:
        return project_polar_cone(y, self.cone)


def project_cylinder(r, corridor: Corridor) -> np.ndarray:
    out = _point(r)
    c, d = corridor.center, corridor.axis
    _cylinder_inplace(out, 0, c[0], c[1], c[2], d[0], d[1], d[2], corridor.radius, corridor.half_length)
    return out


def project_ball(v, radius: float) -> np.ndarray:
    if not radius > 0:
        raise ValueError("radius must be positive")
    out = _point(v)
    _ball_inplace(out, 0, float(radius))
    return out


def project_thrust(u, cap: ThrustCap) -> np.ndarray:
    """Project onto the tilted cone first, then onto the magnitude ball."""
    out = _point(u)
    _thrust_inplace(out, 0, cap.gamma_hi, math.cos(cap.tilt), math.sin(cap.tilt))
    return out


def project_polar_cone(y, cone: ConeSpec) -> np.ndarray:
    out = np.array(cone._check(y), dtype=float)
    project_polar_inplace(out, cone.zero)
    return out


def project_singleton(x, singleton: Singleton) -> np.ndarray:
    return singleton.point.copy()


def contains(set_, x, tol: float = 0.0) -> bool:
    """True iff every defining inequality of ``set_`` holds with slack >= -tol."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    return set_.contains(x, tol)
