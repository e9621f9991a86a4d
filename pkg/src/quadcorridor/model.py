"""Physical parameters, first-order-hold dynamics, and trajectory containers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .sets import Corridor, ThrustCap

GRAVITY = np.array([0.0, 0.0, -9.81])
GRAVITY.setflags(write=False)


def _vec3(value, name: str) -> np.ndarray:
    arr = np.array(value, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PhysicalParams:
    """Scalar vehicle and problem parameters (SI units).

    Defaults are the values used for the randomized corridor benchmark.
    """

    mass: float = 0.35
    dt: float = 0.2
    rate_weight: float = 1.0
    max_speed: float = 3.0
    thrust_min: float = 2.0
    thrust_max: float = 5.0
    max_tilt: float = math.pi / 4
    max_thrust_rate: float = 3.0

    def __post_init__(self):
        for name in ("mass", "dt", "max_speed", "max_thrust_rate", "thrust_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.rate_weight < 0:
            raise ValueError("rate_weight must be non-negative")
        if self.thrust_min < 0:
            raise ValueError("thrust_min must be non-negative")
        if not self.thrust_min <= self.thrust_max:
            raise ValueError("thrust_min must not exceed thrust_max")
        if not 0.0 <= self.max_tilt <= math.pi / 2:
            raise ValueError("max_tilt must lie in [0, pi/2]")

    @property
    def gravity(self) -> np.ndarray:
        return GRAVITY

    @property
    def thrust_cap(self) -> ThrustCap:
        return ThrustCap(self.thrust_max, self.max_tilt)

    @property
    def hover_thrust(self) -> np.ndarray:
        return -self.mass * GRAVITY


@dataclass(frozen=True)
class BoundaryConditions:
    r0: np.ndarray
    v0: np.ndarray
    rf: np.ndarray
    vf: np.ndarray
    uf: np.ndarray

    def __post_init__(self):
        for name in ("r0", "v0", "rf", "vf", "uf"):
            object.__setattr__(self, name, _vec3(getattr(self, name), name))

    def check(self, params: PhysicalParams, tol: float = 1e-9) -> None:
        """Raise ``ValueError`` unless the final thrust is admissible."""
        uf = self.uf
        if uf[2] < params.thrust_min - tol:
            raise ValueError(f"final thrust {uf} violates the thrust floor {params.thrust_min}")
        if not params.thrust_cap.contains(uf, tol):
            raise ValueError(f"final thrust {uf} violates the magnitude/tilt limits")


@dataclass(frozen=True)
class Scenario:
    """Full problem description: parameters, boundary conditions, corridors."""

    params: PhysicalParams
    boundary: BoundaryConditions
    corridors: tuple[Corridor, ...]
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "corridors", tuple(self.corridors))
        if not self.corridors:
            raise ValueError("a scenario needs at least one corridor")
        self.boundary.check(self.params)

    @property
    def n_corridors(self) -> int:
        return len(self.corridors)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Discrete trajectory with ``t + 1`` knots.

    Thrust rates are always derived from the thrusts, ``w[k] = u[k+1] - u[k]``.
    """

    r: np.ndarray
    v: np.ndarray
    u: np.ndarray
    w: np.ndarray = field(init=False)

    def __post_init__(self):
        arrays = {}
        for name in ("r", "v", "u"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 3:
                raise ValueError(f"{name} must have shape (t+1, 3), got {arr.shape}")
            arrays[name] = arr
        n = arrays["r"].shape[0]
        if n < 2 or arrays["v"].shape[0] != n or arrays["u"].shape[0] != n:
            raise ValueError("r, v, u must share a length of at least 2")
        arrays["w"] = np.diff(arrays["u"], axis=0)
        for name, arr in arrays.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def horizon(self) -> int:
        return self.r.shape[0] - 1


def propagate(params: PhysicalParams, r, v, u, u_next):
    """One exact first-order-hold step of the double-integrator dynamics."""
    dt, m = params.dt, params.mass
    r = np.asarray(r, dtype=float)
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    u_next = np.asarray(u_next, dtype=float)
    r_next = r + dt * v + dt**2 / (3 * m) * (u + 0.5 * u_next) + dt**2 / 2 * GRAVITY
    v_next = v + dt / (2 * m) * (u + u_next) + dt * GRAVITY
    return r_next, v_next


def simulate(params: PhysicalParams, r0, v0, thrusts) -> Trajectory:
    """Roll the dynamics forward under a sequence of ``t + 1`` thrust knots."""
    u = np.array(thrusts, dtype=float)
    if u.ndim != 2 or u.shape[1] != 3 or u.shape[0] < 2:
        raise ValueError(f"thrusts must have shape (t+1, 3) with t >= 1, got {u.shape}")
    r = np.empty_like(u)
    v = np.empty_like(u)
    r[0] = _vec3(r0, "r0")
    v[0] = _vec3(v0, "v0")
    for k in range(u.shape[0] - 1):
        r[k + 1], v[k + 1] = propagate(params, r[k], v[k], u[k], u[k + 1])
    return Trajectory(r, v, u)


def objective(params: PhysicalParams, trajectory: Trajectory) -> float:
    u, w = trajectory.u, trajectory.w
    return 0.5 * float(np.sum(u * u)) + 0.5 * params.rate_weight * float(np.sum(w * w))
