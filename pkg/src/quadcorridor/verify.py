"""Independent feasibility checks and an exhaustive corridor-assignment oracle.

``check_trajectory`` evaluates every constraint of the original problem
(position in the union of all corridors) directly from a trajectory, without
going through the conic reformulation. ``exhaustive_optimum`` replaces a
mixed-integer solve at small scale: it enumerates every monotone
knot-to-corridor assignment and keeps the cheapest feasible one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .assemble import TriggerSchedule, assemble_assignment, assign_slots
from .model import Scenario, Trajectory, propagate
from .pipg import SolverConfig, Status, solve

ORACLE_CONFIG = SolverConfig(max_iter=100_000, epsilon=1e-4)


class OracleInfeasible(RuntimeError):
    pass


class EnumerationTooLarge(RuntimeError):
    pass


@dataclass
class FeasibilityReport:
    tol: float
    dynamics: float
    boundary: dict[str, float]
    slacks: dict[str, np.ndarray]
    junctions: list[bool] = field(default_factory=list)

    @property
    def worst(self) -> dict[str, float]:
        """Worst slack per constraint family (negative means violated)."""
        out = {"dynamics": -self.dynamics}
        out.update({f"boundary_{k}": -v for k, v in self.boundary.items()})
        out.update({k: float(np.min(v)) if v.size else math.inf for k, v in self.slacks.items()})
        return out

    @property
    def violated(self) -> list[str]:
        return [name for name, s in self.worst.items() if s < -self.tol]

    @property
    def passed(self) -> bool:
        return not self.violated

    def summary(self) -> str:
        lines = [f"{'PASS' if self.passed else 'FAIL'} at tol={self.tol:g}"]
        for name, s in self.worst.items():
            flag = "  VIOLATED" if s < -self.tol else ""
            lines.append(f"  {name:<16s} worst slack {s: .3e}{flag}")
        if self.junctions:
            lines.append(f"  junctions inside both corridors: {sum(self.junctions)}/{len(self.junctions)}")
        return "\n".join(lines)


def check_trajectory(
    scenario: Scenario,
    trajectory: Trajectory,
    tol: float = 1e-3,
    schedule: TriggerSchedule | None = None,
) -> FeasibilityReport:
    p, bc = scenario.params, scenario.boundary
    r, v, u = trajectory.r, trajectory.v, trajectory.u
    t = trajectory.horizon

    dyn = 0.0
    for k in range(t):
        r_next, v_next = propagate(p, r[k], v[k], u[k], u[k + 1])
        dyn = max(dyn, float(np.max(np.abs(r_next - r[k + 1]))), float(np.max(np.abs(v_next - v[k + 1]))))

    boundary = {
        "r0": float(np.max(np.abs(r[0] - bc.r0))),
        "v0": float(np.max(np.abs(v[0] - bc.v0))),
        "rf": float(np.max(np.abs(r[t] - bc.rf))),
        "vf": float(np.max(np.abs(v[t] - bc.vf))),
        "uf": float(np.max(np.abs(u[t] - bc.uf))),
    }

    corridor = np.array([max(c.slack(rk) for c in scenario.corridors) for rk in r])
    speed = p.max_speed - np.linalg.norm(v, axis=1)
    unorm = np.linalg.norm(u, axis=1)
    slacks = {
        "corridor": corridor,
        "velocity": speed,
        "thrust_max": p.thrust_max - unorm,
        "thrust_tilt": u[:, 2] - math.cos(p.max_tilt) * unorm,
        "thrust_min": u[:, 2] - p.thrust_min,
        "thrust_rate": p.max_thrust_rate - np.linalg.norm(trajectory.w, axis=1),
    }

    junctions = []
    if schedule is not None:
        ends = np.cumsum(schedule.taus)[:-1]
        for i, k in enumerate(ends):
            a, b = scenario.corridors[i], scenario.corridors[i + 1]
            junctions.append(bool(a.contains(r[k], tol) and b.contains(r[k], tol)))
    return FeasibilityReport(tol, dyn, boundary, slacks, junctions)


def count_assignments(n_corridors: int, t: int) -> int:
    """Monotone onto maps from ``t + 1`` knots to ``n_corridors`` corridors."""
    return math.comb(t, n_corridors - 1)


def enumerate_assignments(n_corridors: int, t: int, cap: int = 100_000):
    """Every nondecreasing onto map ``{0..t} -> {0..l-1}`` (0-based corridors),
    in lexicographic order of the knots where the corridor index changes."""
    if n_corridors < 1 or t < n_corridors:
        raise ValueError("need n_corridors >= 1 and t >= n_corridors")
    count = count_assignments(n_corridors, t)
    if count > cap:
        raise EnumerationTooLarge(f"{count} assignments exceed the cap of {cap}")
    out = []
    for cuts in combinations(range(1, t + 1), n_corridors - 1):
        a = np.zeros(t + 1, dtype=np.int64)
        for c in cuts:
            a[c:] += 1
        out.append(a)
    return out


@dataclass
class OracleResult:
    cost: float
    assignment: np.ndarray
    enumerated: int
    statuses: list[Status]
    costs: list[float]
    result: object = None

    @property
    def schedule(self) -> TriggerSchedule | None:
        """The equivalent trigger schedule, if the assignment has one."""
        counts = np.bincount(self.assignment)
        taus = (int(counts[0]) - 1, *map(int, counts[1:]))
        return TriggerSchedule(taus) if min(taus) >= 1 else None


def exhaustive_optimum(
    scenario: Scenario,
    t: int,
    config: SolverConfig = ORACLE_CONFIG,
    cap: int = 100_000,
) -> OracleResult:
    """Cheapest feasible trajectory over all monotone corridor assignments of
    horizon ``t``. Ties go to the first assignment found."""
    assignments = enumerate_assignments(scenario.n_corridors, t, cap)
    best = None
    statuses, costs = [], []
    for a in assignments:
        res = solve(assemble_assignment(scenario, a), config)
        statuses.append(res.status)
        costs.append(res.objective if res.feasible else math.inf)
        if res.feasible and (best is None or res.objective < best[0]):
            best = (res.objective, a, res)
    if best is None:
        raise OracleInfeasible(f"no feasible assignment for horizon t={t}")
    return OracleResult(best[0], best[1], len(assignments), statuses, costs, best[2])


def greedy_scan(
    scenario: Scenario,
    taus,
    i: int,
    lower: int,
    upper: int,
    config: SolverConfig | None = None,
    indeterminate_as_infeasible: bool = True,
):
    """Smallest ``tau_i`` in ``[lower, upper]`` that solves feasibly with the
    other corridors fixed at ``taus``, scanning every value in order.

    Returns ``(tau_i or None, statuses)``.
    """
    config = config or SolverConfig()
    statuses = []
    for tau in range(lower, upper + 1):
        trial = list(taus)
        trial[i] = tau
        status = solve(assemble_assignment(scenario, assign_slots(TriggerSchedule(trial))), config).status
        statuses.append((tau, status))
        ok = status is Status.FEASIBLE or (status is Status.INDETERMINATE and not indeterminate_as_infeasible)
        if ok:
            return tau, statuses
    return None, statuses
