"""Randomised experiment instances and summary helpers.

One seed feeds a ``numpy.random.SeedSequence`` that is split into two
independent PCG64 streams: stream 0 draws generator costs, stream 1 draws
initial prices. Changing how many prices are drawn never changes the costs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .dynamics import RunConfig
from .grid import GridCase, case_to_dict

__all__ = [
    "ExperimentSpec",
    "streams",
    "generate_costs",
    "generate_case",
    "initial_prices",
    "cluster_values",
    "dump_case",
]

COST_STREAM = 0
PRICE_STREAM = 1


@dataclass(frozen=True)
class ExperimentSpec:
    case_path: str
    cost_range: tuple[float, float] = (5.0, 20.0)
    price_init_range: tuple[float, float] = (5.0, 15.0)
    rng_seed: int = 0
    config: RunConfig = field(default_factory=RunConfig)
    out_dir: str = "."

    def __post_init__(self):
        for lo, hi in (self.cost_range, self.price_init_range):
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
                raise ValueError(f"bad range [{lo}, {hi}]")

    def with_config(self, **overrides) -> "ExperimentSpec":
        return replace(self, config=replace(self.config, **overrides))


def streams(seed: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(2)
    return [np.random.Generator(np.random.PCG64(s)) for s in children]


def generate_costs(n: int, cost_range=(5.0, 20.0), seed: int = 0) -> np.ndarray:
    lo, hi = cost_range
    return streams(seed)[COST_STREAM].uniform(lo, hi, size=n)


def generate_case(template: GridCase, cost_range=(5.0, 20.0), seed: int = 0) -> GridCase:
    """Fill the generator costs of ``template`` with seeded uniform draws."""
    costs = generate_costs(len(template.generators), cost_range, seed)
    case = template.with_costs(costs)
    name = template.name.removesuffix("_template") if template.name else "case"
    return GridCase(case.buses, case.slack_bus, case.lines, case.generators, case.users,
                    name=f"{name}_seed{seed}")


def initial_prices(n: int, price_range=(5.0, 15.0), seed: int = 0) -> np.ndarray:
    lo, hi = price_range
    return streams(seed)[PRICE_STREAM].uniform(lo, hi, size=n)


def cluster_values(values, tol: float = 1e-4) -> list[float]:
    """Merge sorted values whose consecutive gaps are ``<= tol``; returns cluster means."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        return []
    groups = [[v[0]]]
    for a in v[1:]:
        if a - groups[-1][-1] <= tol:
            groups[-1].append(a)
        else:
            groups.append([a])
    return [float(np.mean(g)) for g in groups]


def dump_case(case: GridCase, path) -> None:
    Path(path).write_text(json.dumps(case_to_dict(case), indent=2) + "\n")
