"""System cost J(x) of serving a demand profile, and its LMP subgradient.

The dispatch problem is a PTDF-form DC OPF in the generator outputs only::

    J(x) = min  c @ xi
           s.t. sum(xi) = sum(x)                                (balance)
                -F_l <= H_l @ (G xi - U x) <= F_l   for limited lines
                0 <= xi <= pmax

where ``G`` and ``U`` map generators and users to buses and ``H`` is the
PTDF matrix. ``J`` is the optimal value of an LP whose right-hand side is
affine in ``x``, hence convex and piecewise linear in ``x``. The optimal
row multipliers give one element of its subdifferential.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .grid import GridCase
from .lp import LpProblem, LpSolution, LpStatus, solve_lp

__all__ = [
    "DEFAULT_VOLL",
    "DemandUnservable",
    "DispatchResult",
    "DispatchModel",
    "evaluate_cost",
    "subgradient_check",
]

DEFAULT_VOLL = 1000.0
# tolerance for reporting a constraint as binding
_BIND_TOL = 1e-7


class DemandUnservable(RuntimeError):
    """The dispatch LP is infeasible for the requested demand."""

    def __init__(self, message, certificate: LpSolution | None = None):
        super().__init__(message)
        self.certificate = certificate


@dataclass
class DispatchResult:
    value: float
    generation: np.ndarray
    lmp: np.ndarray
    flows: np.ndarray
    binding: tuple[str, ...] = ()
    shed: np.ndarray | None = None  # fictitious VOLL generation per bus
    energy_price: float = 0.0
    congestion_duals: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def to_dict(self) -> dict:
        out = {
            "J": self.value,
            "generation": self.generation.tolist(),
            "lmp": self.lmp.tolist(),
            "flows": self.flows.tolist(),
            "binding": list(self.binding),
            "energy_price": self.energy_price,
            "congestion_duals": self.congestion_duals.tolist(),
        }
        if self.shed is not None:
            out["shed"] = self.shed.tolist()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


class DispatchModel:
    """Precomputed LP skeleton for one case; only the row bounds depend on ``x``.

    Holding one of these avoids rebuilding the constraint matrix on every
    cost evaluation inside the price iteration.
    """

    def __init__(self, case: GridCase, ptdf: np.ndarray, voll: float | None = None):
        self.case = case
        self.ptdf = np.asarray(ptdf, dtype=float)
        self.voll = voll
        n_bus = case.n_buses
        gen_bus = np.array([g.bus for g in case.generators], dtype=int)
        costs = case.costs
        pmax = np.array([np.inf if g.pmax is None else g.pmax for g in case.generators])
        if costs.size and (np.any(~np.isfinite(costs)) or np.any(costs < 0)):
            raise ValueError("generator costs must be finite and nonnegative")
        if voll is not None:
            gen_bus = np.concatenate([gen_bus, np.arange(n_bus)])
            costs = np.concatenate([costs, np.full(n_bus, float(voll))])
            pmax = np.concatenate([pmax, np.full(n_bus, np.inf)])
        self.n_real = len(case.generators)
        self.gen_bus = gen_bus
        self.costs = costs
        self.pmax = pmax
        self.user_bus = case.user_buses

        limits = np.array([np.inf if ln.limit is None else ln.limit for ln in case.lines])
        self.limited = np.flatnonzero(np.isfinite(limits))
        self.limits = limits[self.limited]
        self.h_gen = self.ptdf[np.ix_(self.limited, gen_bus)] if gen_bus.size else np.zeros((self.limited.size, 0))
        self.h_user = self.ptdf[np.ix_(self.limited, self.user_bus)]
        self.A = np.vstack([np.ones((1, gen_bus.size)), self.h_gen])

    def problem(self, x: np.ndarray) -> LpProblem:
        shift = self.h_user @ x
        total = float(np.sum(x))
        rl = np.concatenate([[total], shift - self.limits])
        ru = np.concatenate([[total], shift + self.limits])
        return LpProblem(self.costs, self.A, rl, ru, np.zeros(self.costs.size), self.pmax)

    def evaluate(self, x) -> DispatchResult:
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.user_bus.size:
            raise ValueError(f"demand has {x.size} entries, case has {self.user_bus.size} users")
        if not np.all(np.isfinite(x)):
            raise ValueError("demand must be finite")
        sol = solve_lp(self.problem(x))
        if sol.status is LpStatus.INFEASIBLE:
            raise DemandUnservable("demand unservable", certificate=sol)
        if sol.status is LpStatus.UNBOUNDED:
            raise RuntimeError("dispatch LP unbounded; costs must be nonnegative")
        y = sol.duals
        energy, cong = float(y[0]), y[1:]
        lmp = energy + self.h_user.T @ cong
        xi = sol.x
        inj = np.zeros(self.case.n_buses)
        np.add.at(inj, self.gen_bus, xi)
        np.subtract.at(inj, self.user_bus, x)
        flows = self.ptdf @ inj
        binding = []
        for k, line in enumerate(self.limited):
            if abs(abs(flows[line]) - self.limits[k]) <= _BIND_TOL * (1 + self.limits[k]):
                binding.append(f"line:{line}")
        for g in range(self.n_real):
            if np.isfinite(self.pmax[g]) and xi[g] >= self.pmax[g] - _BIND_TOL * (1 + self.pmax[g]):
                binding.append(f"gen_max:{g}")
        shed = None
        if self.voll is not None:
            shed = xi[self.n_real:].copy()
        return DispatchResult(
            value=float(sol.objective),
            generation=xi[: self.n_real].copy(),
            lmp=lmp,
            flows=flows,
            binding=tuple(binding),
            shed=shed,
            energy_price=energy,
            congestion_duals=cong.copy(),
        )

    def cost(self, x) -> float:
        """``J(x)``, or ``inf`` when the demand cannot be served. Skips the dual bookkeeping."""
        sol = solve_lp(self.problem(np.asarray(x, dtype=float).ravel()))
        if sol.status is LpStatus.OPTIMAL:
            return sol.objective
        if sol.status is LpStatus.INFEASIBLE:
            return np.inf
        raise RuntimeError("dispatch LP unbounded; costs must be nonnegative")


def evaluate_cost(case: GridCase, ptdf, x, voll: float | None = None) -> DispatchResult:
    """Dispatch ``case`` for demand ``x`` and return J, generation and LMPs."""
    return DispatchModel(case, ptdf, voll).evaluate(x)


def subgradient_check(case, ptdf, x, y, tol: float = 1e-6, model: DispatchModel | None = None) -> bool:
    """Whether ``J(y) >= J(x) + lmp(x) @ (y - x) - tol``."""
    model = model or DispatchModel(case, ptdf)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    at_x = model.evaluate(x)
    at_y = model.evaluate(y)
    return bool(at_y.value >= at_x.value + at_x.lmp @ (y - x) - tol)
