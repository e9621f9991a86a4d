"""Bisection over per-corridor triggering times with infeasibility detection."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .assemble import TriggerSchedule, assemble
from .model import Scenario
from .pipg import SolverConfig, SolveResult, Status, solve

log = logging.getLogger(__name__)


class ScenarioInfeasible(RuntimeError):
    """No schedule within the search limits admits a feasible trajectory."""


@dataclass(frozen=True)
class TimeBounds:
    lower: tuple[int, ...]
    upper: tuple[int, ...]

    def __post_init__(self):
        lower = tuple(int(v) for v in self.lower)
        upper = tuple(int(v) for v in self.upper)
        if len(lower) != len(upper) or not lower:
            raise ValueError("lower and upper bounds must be non-empty and of equal length")
        if any(not 1 <= lo <= hi for lo, hi in zip(lower, upper)):
            raise ValueError(f"bounds must satisfy 1 <= lower <= upper, got {lower} / {upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)


@dataclass
class BisectionReport:
    schedule: TriggerSchedule
    bounds: TimeBounds
    traces: list[list[tuple[int, Status]]]
    solves: int
    result: SolveResult
    start_bounds: TimeBounds | None = None
    validation_solves: int = 0
    iterations: list[int] = field(default_factory=list)
    lower_checks: list = field(default_factory=list)

    @property
    def per_corridor_solves(self) -> list[int]:
        """Bisection midpoints solved per corridor."""
        return [len(tr) for tr in self.traces]

    @property
    def per_corridor_total(self) -> list[int]:
        """Midpoints plus the optional lower-bound check, per corridor."""
        checks = self.lower_checks or [None] * len(self.traces)
        return [len(tr) + (c is not None) for tr, c in zip(self.traces, checks)]


def _is_feasible(status: Status, indeterminate_as_infeasible: bool) -> bool:
    if status is Status.INDETERMINATE:
        return not indeterminate_as_infeasible
    return status is Status.FEASIBLE


def initial_bounds(scenario: Scenario) -> TimeBounds:
    """Step counts for traversing each corridor at full speed (lower) and at
    half speed (upper)."""
    p = scenario.params
    lower, upper = [], []
    for c in scenario.corridors:
        length = 2.0 * c.half_length
        fast = length / (p.max_speed * p.dt)
        slow = length / (0.5 * p.max_speed * p.dt)
        # guard against 1.9999999 style round-off
        lo = max(1, math.floor(fast + 1e-9))
        hi = max(lo, math.ceil(slow - 1e-9))
        lower.append(lo)
        upper.append(hi)
    return TimeBounds(tuple(lower), tuple(upper))


def _solve_schedule(scenario, taus, config):
    return solve(assemble(scenario, TriggerSchedule(taus)), config)


def validate_bounds(
    scenario: Scenario,
    bounds: TimeBounds,
    config: SolverConfig | None = None,
    indeterminate_as_infeasible: bool = True,
    max_growth: int = 8,
    stats: dict | None = None,
) -> TimeBounds:
    """Make sure the upper bounds are feasible and the lower bounds are not.

    Infeasible upper bounds are doubled (at most up to ``max_growth`` times
    their original value); a feasible lower bound replaces the upper bound.
    """
    config = config or SolverConfig()
    stats = stats if stats is not None else {}
    stats.setdefault("solves", 0)
    upper = list(bounds.upper)
    original = list(bounds.upper)
    while True:
        stats["solves"] += 1
        res = _solve_schedule(scenario, upper, config)
        if _is_feasible(res.status, indeterminate_as_infeasible):
            stats["upper_result"] = res
            break
        doubled = [2 * u for u in upper]
        if any(d > max_growth * o for d, o in zip(doubled, original)):
            raise ScenarioInfeasible(
                f"no feasible schedule up to {max_growth}x the initial upper bounds {tuple(original)}"
            )
        log.info("upper bounds %s infeasible (%s); doubling", upper, res.status.value)
        upper = doubled
    lower = list(bounds.lower)
    if lower != upper:
        stats["solves"] += 1
        res = _solve_schedule(scenario, lower, config)
        if _is_feasible(res.status, indeterminate_as_infeasible):
            log.info("lower bounds %s already feasible", lower)
            stats["upper_result"] = res
            upper = list(lower)
    return TimeBounds(tuple(min(lo, up) for lo, up in zip(lower, upper)), tuple(upper))


def bisect(
    scenario: Scenario,
    bounds: TimeBounds,
    resolution: int = 1,
    config: SolverConfig | None = None,
    indeterminate_as_infeasible: bool = True,
    check_lower: bool = False,
) -> BisectionReport:
    """Tighten each corridor's upper bound in turn, then solve at the tightened
    upper bounds.

    Corridor ``i`` is bisected with every other corridor held at its current
    upper bound; a midpoint that solves feasibly becomes the new upper bound,
    otherwise the new lower bound. With ``indeterminate_as_infeasible=False``
    an Indeterminate final solve is accepted as well.

    The lower bounds are taken to be infeasible and are never solved, so the
    result can sit one step above a feasible lower bound. ``check_lower=True``
    solves ``tau_i = lower_i`` before bisecting corridor ``i`` (one extra solve
    per corridor) and stops there if it is feasible.
    """
    if resolution < 1:
        raise ValueError("resolution must be >= 1 step")
    if len(bounds.upper) != scenario.n_corridors:
        raise ValueError("bounds do not match the number of corridors")
    config = config or SolverConfig()
    lower = list(bounds.lower)
    upper = list(bounds.upper)
    traces: list[list[tuple[int, Status]]] = []
    iterations = []
    lower_checks = []
    solves = 0
    for i in range(scenario.n_corridors):
        trace = []
        check = None
        if check_lower and upper[i] > lower[i]:
            taus = list(upper)
            taus[i] = lower[i]
            res = _solve_schedule(scenario, taus, config)
            solves += 1
            iterations.append(res.iterations)
            check = (lower[i], res.status)
            if _is_feasible(res.status, indeterminate_as_infeasible):
                upper[i] = lower[i]
        lower_checks.append(check)
        while upper[i] - lower[i] > resolution:
            mid = (upper[i] + lower[i]) // 2
            taus = list(upper)
            taus[i] = mid
            res = _solve_schedule(scenario, taus, config)
            solves += 1
            iterations.append(res.iterations)
            trace.append((mid, res.status))
            if _is_feasible(res.status, indeterminate_as_infeasible):
                upper[i] = mid
            else:
                lower[i] = mid
        traces.append(trace)

    schedule = TriggerSchedule(tuple(upper))
    result = solve(assemble(scenario, schedule), config)
    solves += 1
    iterations.append(result.iterations)
    if not _is_feasible(result.status, indeterminate_as_infeasible):
        raise RuntimeError(
            f"final solve at verified schedule {schedule.taus} returned {result.status.value}"
        )
    return BisectionReport(
        schedule=schedule,
        bounds=TimeBounds(tuple(lower), tuple(upper)),
        traces=traces,
        solves=solves,
        result=result,
        start_bounds=bounds,
        iterations=iterations,
        lower_checks=lower_checks,
    )


def plan(
    scenario: Scenario,
    resolution: int = 1,
    config: SolverConfig | None = None,
    indeterminate_as_infeasible: bool = True,
    check_lower: bool = False,
) -> BisectionReport:
    """Initial bounds, validation and bisection in one call."""
    config = config or SolverConfig()
    stats: dict = {}
    bounds = validate_bounds(
        scenario, initial_bounds(scenario), config, indeterminate_as_infeasible, stats=stats
    )
    report = bisect(scenario, bounds, resolution, config, indeterminate_as_infeasible, check_lower)
    report.validation_solves = stats["solves"]
    return report
