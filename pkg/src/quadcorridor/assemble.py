"""Conic reformulation of the time-triggered trajectory problem.

The primal vector stacks ``r_0..r_t, v_0..v_t, u_0..u_t, w_0..w_{t-1}``
(length ``12t + 9``). Constraints are ``Hx - b in K`` with
``K = {0}^{9t} x R_+^{t+1}`` and ``x in D``, a product of one set per
3-vector slot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .model import GRAVITY, PhysicalParams, Scenario, Trajectory
from .sets import (
    BALL,
    CYLINDER,
    N_BLOCK_PARAMS,
    SINGLETON,
    THRUST,
    BallSet,
    ConeSpec,
    Singleton,
    project_blocks,
)


@dataclass(frozen=True)
class TriggerSchedule:
    """Number of time steps spent in each corridor."""

    taus: tuple[int, ...]

    def __post_init__(self):
        taus = tuple(int(x) for x in self.taus)
        if not taus:
            raise ValueError("schedule needs at least one corridor")
        if any(x < 1 for x in taus):
            raise ValueError(f"every triggering time must be >= 1, got {taus}")
        object.__setattr__(self, "taus", taus)

    @property
    def horizon(self) -> int:
        return sum(self.taus)

    def __len__(self):
        return len(self.taus)


def assign_slots(schedule: TriggerSchedule) -> np.ndarray:
    """Corridor index (0-based) for every knot ``k = 0..t``.

    Knot ``k`` goes to the first corridor whose cumulative step count reaches
    ``k``, so a junction knot belongs to the earlier corridor.
    """
    ends = np.cumsum(schedule.taus)
    k = np.arange(schedule.horizon + 1)
    return np.searchsorted(ends, k, side="left")


def slots_to_schedule(assignment) -> TriggerSchedule:
    """Inverse of ``assign_slots`` for assignments it can produce."""
    counts = np.bincount(np.asarray(assignment), minlength=int(np.max(assignment)) + 1)
    return TriggerSchedule((int(counts[0]) - 1, *map(int, counts[1:])))


def primal_dim(t: int) -> int:
    return 12 * t + 9


def dual_dim(t: int) -> int:
    return 10 * t + 1


def build_cost(t: int, rate_weight: float) -> np.ndarray:
    """Diagonal of the quadratic cost: zero on r and v, one on u, weight on w."""
    if t < 1:
        raise ValueError("t must be >= 1")
    if rate_weight < 0:
        raise ValueError("rate_weight must be non-negative")
    return np.concatenate([np.zeros(6 * (t + 1)), np.ones(3 * (t + 1)), np.full(3 * t, float(rate_weight))])


def build_constraints(params: PhysicalParams, t: int):
    """Sparse ``H``, offset ``b`` and cone ``K`` for dynamics, rates and thrust floor."""
    if t < 1:
        raise ValueError("t must be >= 1")
    dt, m = params.dt, params.mass
    R, V, U, W = 0, 3 * (t + 1), 6 * (t + 1), 9 * (t + 1)
    k = np.arange(t)
    a = np.arange(3)
    kk = np.repeat(k, 3)
    aa = np.tile(a, t)
    idx = 3 * kk + aa  # component index of step k
    nxt = idx + 3  # same component, step k + 1

    rows, cols, vals = [], [], []

    def put(row, col, val):
        rows.append(row)
        cols.append(col)
        vals.append(np.broadcast_to(val, row.shape))

    pos = idx
    put(pos, R + nxt, 1.0)
    put(pos, R + idx, -1.0)
    put(pos, V + idx, -dt)
    put(pos, U + idx, -dt**2 / (3 * m))
    put(pos, U + nxt, -dt**2 / (6 * m))

    vel = 3 * t + idx
    put(vel, V + nxt, 1.0)
    put(vel, V + idx, -1.0)
    put(vel, U + idx, -dt / (2 * m))
    put(vel, U + nxt, -dt / (2 * m))

    rate = 6 * t + idx
    put(rate, U + nxt, 1.0)
    put(rate, U + idx, -1.0)
    put(rate, W + idx, -1.0)

    floor = 9 * t + np.arange(t + 1)
    put(floor, U + 3 * np.arange(t + 1) + 2, 1.0)

    H = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dual_dim(t), primal_dim(t)),
    )
    H.sort_indices()
    b = np.concatenate(
        [
            np.tile(dt**2 / 2 * GRAVITY, t),
            np.tile(dt * GRAVITY, t),
            np.zeros(3 * t),
            np.full(t + 1, params.thrust_min),
        ]
    )
    return H, b, ConeSpec(9 * t, t + 1)


@dataclass(frozen=True, eq=False)
class ConicProblem:
    """``minimize 1/2 x'Px  s.t.  Hx - b in K,  x in D`` with diagonal ``P``."""

    scenario: Scenario
    t: int
    cost: np.ndarray
    H: sp.csr_matrix
    HT: sp.csr_matrix
    b: np.ndarray
    cone: ConeSpec
    assignment: np.ndarray
    kinds: np.ndarray
    block_params: np.ndarray

    @property
    def n(self) -> int:
        return self.cost.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[0]

    @property
    def params(self) -> PhysicalParams:
        return self.scenario.params

    def project_D(self, x) -> np.ndarray:
        out = np.array(x, dtype=float)
        if out.shape != (self.n,):
            raise ValueError(f"expected length {self.n}, got shape {out.shape}")
        project_blocks(out, self.kinds, self.block_params)
        return out

    def objective(self, x) -> float:
        x = np.asarray(x)
        return 0.5 * float(x @ (self.cost * x))

    def residual(self, x) -> np.ndarray:
        return self.H @ np.asarray(x) - self.b

    def cone_violation(self, x) -> float:
        """Largest violation of ``Hx - b in K`` (0 when satisfied)."""
        res = self.residual(x)
        p = self.cone.zero
        worst = float(np.max(np.abs(res[:p]))) if p else 0.0
        return max(worst, float(np.max(-res[p:], initial=0.0)))

    def decode(self, x) -> Trajectory:
        t = self.t
        x = np.asarray(x, dtype=float)
        s = 3 * (t + 1)
        return Trajectory(
            x[:s].reshape(-1, 3),
            x[s : 2 * s].reshape(-1, 3),
            x[2 * s : 3 * s].reshape(-1, 3),
        )

    def encode(self, trajectory: Trajectory) -> np.ndarray:
        if trajectory.horizon != self.t:
            raise ValueError(f"trajectory horizon {trajectory.horizon} != problem horizon {self.t}")
        return np.concatenate([trajectory.r.ravel(), trajectory.v.ravel(), trajectory.u.ravel(), trajectory.w.ravel()])


def _check_boundary_sets(scenario: Scenario) -> None:
    bc, p = scenario.boundary, scenario.params
    if not scenario.corridors[0].contains(bc.r0, 1e-9):
        raise ValueError("initial position is outside the first corridor")
    if not scenario.corridors[-1].contains(bc.rf, 1e-9):
        raise ValueError("final position is outside the last corridor")
    speed = BallSet(p.max_speed)
    if not (speed.contains(bc.v0, 1e-9) and speed.contains(bc.vf, 1e-9)):
        raise ValueError("boundary velocity exceeds the speed bound")


def assemble_assignment(scenario: Scenario, assignment) -> ConicProblem:
    """Conic problem for an explicit per-knot corridor assignment (0-based)."""
    assignment = np.asarray(assignment, dtype=np.int64)
    t = assignment.shape[0] - 1
    if t < 1:
        raise ValueError("assignment must cover at least two knots")
    if np.any(assignment < 0) or np.any(assignment >= scenario.n_corridors):
        raise ValueError("assignment references an unknown corridor")
    _check_boundary_sets(scenario)
    params, bc = scenario.params, scenario.boundary

    cost = build_cost(t, params.rate_weight)
    H, b, cone = build_constraints(params, t)

    nblocks = 4 * t + 3
    kinds = np.empty(nblocks, dtype=np.int64)
    prm = np.zeros((nblocks, N_BLOCK_PARAMS))
    corridor_params = [c.block_params() for c in scenario.corridors]

    R, V, U, W = 0, t + 1, 2 * (t + 1), 3 * (t + 1)
    kinds[R : R + t + 1] = CYLINDER
    prm[R : R + t + 1] = np.array(corridor_params)[assignment]
    kinds[V : V + t + 1] = BALL
    prm[V : V + t + 1] = BallSet(params.max_speed).block_params()
    kinds[U : U + t + 1] = THRUST
    prm[U : U + t + 1] = params.thrust_cap.block_params()
    kinds[W : W + t] = BALL
    prm[W : W + t] = BallSet(params.max_thrust_rate).block_params()

    for slot, value in ((R, bc.r0), (R + t, bc.rf), (V, bc.v0), (V + t, bc.vf), (U + t, bc.uf)):
        kinds[slot] = SINGLETON
        prm[slot] = Singleton(value).block_params()

    for arr in (cost, b, assignment, kinds, prm):
        arr.setflags(write=False)
    HT = H.T.tocsr()
    HT.sort_indices()
    return ConicProblem(scenario, t, cost, H, HT, b, cone, assignment, kinds, prm)


def assemble(scenario: Scenario, schedule: TriggerSchedule) -> ConicProblem:
    if len(schedule) != scenario.n_corridors:
        raise ValueError(f"schedule has {len(schedule)} entries for {scenario.n_corridors} corridors")
    return assemble_assignment(scenario, assign_slots(schedule))
