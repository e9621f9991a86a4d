"""Minimum-time-ish quadrotor trajectories through sequences of cylindrical
corridors: per-corridor triggering times found by bisection, each candidate
schedule checked by a first-order conic solver that also detects infeasibility.
"""

from .assemble import ConicProblem, TriggerSchedule, assemble, assemble_assignment, assign_slots
from .generate import GeneratorSpec, generate, truncate
from .model import BoundaryConditions, PhysicalParams, Scenario, Trajectory, objective, propagate, simulate
from .pipg import SolverConfig, SolveResult, Status, power_iteration, solve, step_sizes
from .sets import BallSet, ConeSpec, Corridor, Singleton, ThrustCap
from .trigger import BisectionReport, ScenarioInfeasible, TimeBounds, bisect, initial_bounds, plan, validate_bounds
from .verify import check_trajectory, enumerate_assignments, exhaustive_optimum

__version__ = "0.1.0"

__all__ = [
    "BallSet", "BisectionReport", "BoundaryConditions", "ConeSpec", "ConicProblem", "Corridor",
    "GeneratorSpec", "PhysicalParams", "Scenario", "ScenarioInfeasible", "Singleton", "SolveResult",
    "SolverConfig", "Status", "ThrustCap", "TimeBounds", "Trajectory", "TriggerSchedule", "assemble",
    "assemble_assignment", "assign_slots", "bisect", "check_trajectory", "enumerate_assignments",
    "exhaustive_optimum", "generate", "initial_bounds", "objective", "plan", "power_iteration",
    "propagate", "simulate", "solve", "step_sizes", "truncate", "validate_bounds",
]
