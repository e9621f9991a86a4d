"""Seeded random corridor sequences for benchmarking."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .model import BoundaryConditions, PhysicalParams, Scenario
from .sets import Corridor

GENERATOR_VERSION = "1"


@dataclass(frozen=True)
class GeneratorSpec:
    """Sampling intervals for chained cylindrical corridors.

    Each corridor's axis starts where the previous one ended (the first at
    the origin); its full length, radius, azimuth and elevation are drawn
    uniformly. Half-lengths are then extended by ``overlap`` so neighbours
    share volume at the junction.
    """

    n_corridors: int = 7
    radius: tuple[float, float] = (0.10, 0.50)
    length: tuple[float, float] = (1.00, 4.00)
    azimuth: tuple[float, float] = (math.pi / 4, 3 * math.pi / 4)
    elevation: tuple[float, float] = (-math.pi / 4, math.pi / 4)
    overlap: float = 0.1
    seed: int = 0
    params: PhysicalParams = field(default_factory=PhysicalParams)

    def __post_init__(self):
        if self.n_corridors < 1:
            raise ValueError("n_corridors must be >= 1")
        for name in ("radius", "length", "azimuth", "elevation"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} interval is reversed: {(lo, hi)}")
        if self.radius[0] <= 0 or self.length[0] <= 0:
            raise ValueError("radius and length must be positive")
        if self.overlap < 0:
            raise ValueError("overlap must be non-negative")


def generate(spec: GeneratorSpec) -> Scenario:
    rng = np.random.default_rng(spec.seed)
    start = np.zeros(3)
    corridors = []
    for _ in range(spec.n_corridors):
        radius = rng.uniform(*spec.radius)
        length = rng.uniform(*spec.length)
        az = rng.uniform(*spec.azimuth)
        el = rng.uniform(*spec.elevation)
        axis = np.array([math.cos(el) * math.cos(az), math.cos(el) * math.sin(az), math.sin(el)])
        axis /= np.linalg.norm(axis)
        center = start + 0.5 * length * axis
        corridors.append(Corridor(center, axis, radius, 0.5 * length + spec.overlap))
        start = start + length * axis

    p = spec.params
    zero = np.zeros(3)
    boundary = BoundaryConditions(r0=zero, v0=zero, rf=start, vf=zero, uf=p.hover_thrust)
    meta = {
        "seed": spec.seed,
        "generator_version": GENERATOR_VERSION,
        "overlap": spec.overlap,
        "layout": "chained",
    }
    return Scenario(p, boundary, corridors, meta)


def axis_end(scenario: Scenario, i: int) -> np.ndarray:
    """End point of corridor ``i``'s axis before the overlap extension."""
    c = scenario.corridors[i]
    overlap = float(scenario.meta.get("overlap", 0.0))
    return c.center + (c.half_length - overlap) * c.axis


def truncate(scenario: Scenario, n: int) -> Scenario:
    """The first ``n`` corridors, with the goal moved to the end of corridor ``n``."""
    if not 1 <= n <= scenario.n_corridors:
        raise ValueError(f"n must lie in [1, {scenario.n_corridors}]")
    boundary = replace(scenario.boundary, rf=axis_end(scenario, n - 1))
    meta = dict(scenario.meta, corridors_traversed=n)
    return Scenario(scenario.params, boundary, scenario.corridors[:n], meta)
