"""Independent certificates for the planner problem ``min_x sum f_i(x_i) + J(x)``.

``grid_search`` scores demand profiles by brute force and uses only optimal
dispatch *values*, never the LP multipliers, so it stays independent of
the LMP machinery it is used to check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .dcopf import DispatchModel
from .users import UserSet

__all__ = [
    "PlannerSolution",
    "KktReport",
    "OracleError",
    "welfare_cost",
    "default_box",
    "grid_search",
    "joint_lp_kkt_check",
]

MAX_GRID_USERS = 3
# flat grids larger than this are searched coarse-to-fine instead
_MAX_FLAT_POINTS = 4_000


class OracleError(ValueError):
    pass


@dataclass
class PlannerSolution:
    x: np.ndarray
    C: float
    method: str = "GridSearch"
    evaluations: int = 0
    pitch: float = 0.0

    def to_dict(self) -> dict:
        return {"method": self.method, "x": self.x.tolist(), "C": self.C,
                "pitch": self.pitch, "evaluations": self.evaluations}


@dataclass
class KktReport:
    x: np.ndarray
    lmp: np.ndarray
    residual: float
    probes: np.ndarray  # (n, 2): C(x - h e_i) - C(x), C(x + h e_i) - C(x)
    step: float
    tol: float
    failed: list = field(default_factory=list)

    @property
    def probes_pass(self) -> bool:
        return not self.failed

    def to_dict(self) -> dict:
        return {
            "method": "kkt",
            "x": self.x.tolist(),
            "lmp": self.lmp.tolist(),
            "residual": self.residual,
            "probe_step": self.step,
            "probe_deltas": self.probes.tolist(),
            "probes_pass": self.probes_pass,
            "failed_probes": [list(f) for f in self.failed],
        }


def welfare_cost(model: DispatchModel, users: UserSet, x) -> float:
    """Total disutility plus dispatch cost; ``inf`` for unservable demand."""
    J = model.cost(x)
    return users.total(x) + J if np.isfinite(J) else math.inf


def default_box(case, users: UserSet, margin: float = 1.0) -> np.ndarray:
    """Per-user interval wide enough to contain the planner's minimiser.

    Any planner optimum has ``x_i = xbar_i - lmp_i / (2 a_i)``; the box
    covers LMPs in ``[-c_max, 2 c_max]``.
    """
    cmax = float(np.max(case.costs, initial=0.0))
    xbar = np.array([u.xbar for u in case.users])
    a = np.array([u.a for u in case.users])
    lo = xbar - 2 * cmax / (2 * a) - margin
    hi = xbar + cmax / (2 * a) + margin
    return np.column_stack([lo, hi])


def _axes(box, pitch):
    axes = []
    for lo, hi in box:
        n = int(math.floor((hi - lo) / pitch + 1e-9)) + 1
        axes.append(lo + pitch * np.arange(n))
    return axes


def _scan(model, users, axes):
    """Best point of the product grid; ties go to the lexicographically smallest."""
    best_x, best_C, count = None, math.inf, 0
    for point in itertools.product(*axes):
        x = np.array(point)
        C = welfare_cost(model, users, x)
        count += 1
        if C < best_C:
            best_x, best_C = x, C
    return best_x, best_C, count


def grid_search(case, ptdf, users: UserSet, box=None, pitch: float = 1e-3,
                model: DispatchModel | None = None, refine_factor: int = 4) -> PlannerSolution:
    """Minimise the welfare cost over a grid of pitch ``pitch`` inside ``box``.

    Small grids are scanned exhaustively. Larger ones are scanned at a
    coarser pitch first and then re-scanned in a window of two coarse
    pitches around the incumbent, repeating until ``pitch`` is reached. The
    welfare cost is strictly convex, so the window keeps the minimiser.
    """
    n = len(users)
    if n > MAX_GRID_USERS:
        raise OracleError(f"grid search supports at most {MAX_GRID_USERS} users, got {n}")
    model = model or DispatchModel(case, ptdf)
    box = default_box(case, users) if box is None else np.asarray(box, dtype=float).reshape(n, 2)
    if np.any(box[:, 1] < box[:, 0]):
        raise OracleError("empty box")

    widths = box[:, 1] - box[:, 0]
    levels = [pitch]
    while np.prod(np.floor(widths / levels[-1]) + 1) > _MAX_FLAT_POINTS:
        levels.append(levels[-1] * refine_factor)
    levels.reverse()

    total = 0
    cur_box = box
    best_x = None
    for i, h in enumerate(levels):
        best_x, best_C, count = _scan(model, users, _axes(cur_box, h))
        total += count
        if best_x is None:
            raise OracleError("no servable point in the search box")
        if i + 1 < len(levels):
            # keep the next grid aligned with the original box origin
            lo = np.maximum(box[:, 0], best_x - 2 * h)
            hi = np.minimum(box[:, 1], best_x + 2 * h)
            nxt = levels[i + 1]
            lo = box[:, 0] + np.floor((lo - box[:, 0]) / nxt + 1e-9) * nxt
            cur_box = np.column_stack([lo, hi])
    return PlannerSolution(best_x, float(best_C), "GridSearch", total, pitch)


def joint_lp_kkt_check(case, ptdf, users: UserSet, x, step: float = 1e-4, tol: float = 1e-6,
                       model: DispatchModel | None = None) -> KktReport:
    """Stationarity residual ``||lmp + grad f||_inf`` plus one-sided probes of ``C``.

    A probe along ``+-e_i`` fails when it lowers the welfare cost by more
    than ``tol``.
    """
    model = model or DispatchModel(case, ptdf)
    x = np.asarray(x, dtype=float)
    d = model.evaluate(x)
    residual = float(np.max(np.abs(d.lmp + users.grad(x))))
    C0 = users.total(x) + d.value
    probes = np.empty((x.size, 2))
    failed = []
    for i in range(x.size):
        for col, h in enumerate((-step, step)):
            xp = x.copy()
            xp[i] += h
            probes[i, col] = welfare_cost(model, users, xp) - C0
            if probes[i, col] < -tol:
                failed.append((i, h))
    return KktReport(x, d.lmp, residual, probes, step, tol, failed)
