"""Dense bounded-variable primal simplex with dual extraction.

Problems have the form::

    minimize    c @ x
    subject to  row_lower <= A @ x <= row_upper
                lower     <=     x <= upper

with ``+-inf`` allowed in any bound and ``row_lower == row_upper`` for
equality rows. Every row gets a slack ``s = A @ x`` carrying the row bounds,
so the working system is ``[A, -I] z = 0`` with bounded columns only.

The multiplier returned for row ``i`` is the sensitivity of the optimal
value to the active bound of that row (zero when neither bound is active).
For an equality row ``A_i x = b_i`` it is ``d(objective)/d(b_i)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LpStatus",
    "LpProblem",
    "LpSolution",
    "LpUsageError",
    "LpCyclingError",
    "solve_lp",
    "dual_vector",
]

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-11
# degenerate pivots in a row before Dantzig pricing gives way to Bland's rule
BLAND_AFTER = 50


class LpUsageError(ValueError):
    pass


class LpCyclingError(RuntimeError):
    pass


class LpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class LpProblem:
    c: np.ndarray
    A: np.ndarray
    row_lower: np.ndarray
    row_upper: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __init__(self, c, A=None, row_lower=None, row_upper=None, lower=None, upper=None):
        c = np.asarray(c, dtype=float).ravel()
        n = c.size
        A = np.zeros((0, n)) if A is None else np.atleast_2d(np.asarray(A, dtype=float))
        if A.shape[1] != n:
            raise LpUsageError(f"A has {A.shape[1]} columns, expected {n}")
        m = A.shape[0]
        rl = np.full(m, -np.inf) if row_lower is None else np.asarray(row_lower, dtype=float).ravel()
        ru = np.full(m, np.inf) if row_upper is None else np.asarray(row_upper, dtype=float).ravel()
        lo = np.zeros(n) if lower is None else np.asarray(lower, dtype=float).ravel()
        up = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float).ravel()
        if rl.size != m or ru.size != m or lo.size != n or up.size != n:
            raise LpUsageError("inconsistent LP dimensions")
        if np.any(rl > ru) or np.any(lo > up):
            raise LpUsageError("lower bound exceeds upper bound")
        if np.any(np.isnan(A)) or np.any(np.isnan(c)):
            raise LpUsageError("NaN in LP data")
        for name, val in (("c", c), ("A", A), ("row_lower", rl), ("row_upper", ru),
                          ("lower", lo), ("upper", up)):
            object.__setattr__(self, name, val)

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    objective: float = np.nan
    iterations: int = 0
    # direction of unbounded descent, set when status is UNBOUNDED
    ray: np.ndarray | None = None
    # Phase-1 optimum (sum of infeasibilities) and its multipliers when INFEASIBLE
    infeasibility: float = 0.0
    farkas: np.ndarray | None = None
    problem: LpProblem | None = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL

    @property
    def activities(self) -> np.ndarray:
        return self.problem.A @ self.x

    def dual_objective(self) -> float:
        """Dual objective built from row multipliers and reduced costs."""
        p = self.problem
        y, d = self.duals, self.reduced_costs
        return _bound_value(d, p.lower, p.upper) + _bound_value(y, p.row_lower, p.row_upper)

    def primal_residual(self) -> float:
        p = self.problem
        r = self.activities
        viol = np.concatenate([
            p.row_lower - r, r - p.row_upper, p.lower - self.x, self.x - p.upper, [0.0]
        ])
        return float(np.max(viol[np.isfinite(viol)], initial=0.0))

    def dual_residual(self) -> float:
        """Largest violation of the dual sign conditions.

        A positive multiplier needs a finite lower bound to sit on, a negative
        one a finite upper bound; reduced costs must equal ``c - A.T @ y``.
        """
        p = self.problem
        d_ref = p.c - p.A.T @ self.duals
        worst = float(np.max(np.abs(d_ref - self.reduced_costs), initial=0.0))
        for mult, lo, up in ((self.reduced_costs, p.lower, p.upper),
                             (self.duals, p.row_lower, p.row_upper)):
            worst = max(worst, float(np.max(np.where(np.isinf(lo), np.maximum(mult, 0), 0), initial=0)))
            worst = max(worst, float(np.max(np.where(np.isinf(up), np.maximum(-mult, 0), 0), initial=0)))
        return worst

    def complementarity(self) -> np.ndarray:
        """Per-row ``|multiplier * slack to the bound it claims|``."""
        p = self.problem
        r = self.activities
        y = self.duals
        gap_lo = np.where(np.isfinite(p.row_lower), r - p.row_lower, np.inf)
        gap_up = np.where(np.isfinite(p.row_upper), p.row_upper - r, np.inf)
        slack = np.where(y > 0, gap_lo, np.where(y < 0, gap_up, 0.0))
        return np.abs(np.where(y != 0, y * slack, 0.0))


def _bound_value(mult, lo, up) -> float:
    """Sum of ``mult * lo`` for positive and ``mult * up`` for negative multipliers."""
    pos = np.where(mult > 0, mult * np.where(np.isfinite(lo), lo, 0.0), 0.0)
    neg = np.where(mult < 0, mult * np.where(np.isfinite(up), up, 0.0), 0.0)
    return float(np.sum(pos) + np.sum(neg))


def dual_vector(solution: LpSolution) -> np.ndarray:
    """Row multipliers of an optimal solution."""
    if not solution.optimal:
        raise LpUsageError(f"no dual vector for a {solution.status.value} LP")
    return solution.duals.copy()


class _Simplex:
    """Working state of one solve. Columns are ``[x (n), s (m), art (m)]``."""

    def __init__(self, prob: LpProblem):
        self.prob = prob
        m, n = prob.shape
        self.m, self.n = m, n
        self.M = np.hstack([prob.A, -np.eye(m), np.zeros((m, m))])
        self.lo = np.concatenate([prob.lower, prob.row_lower, np.zeros(m)])
        self.up = np.concatenate([prob.upper, prob.row_upper, np.full(m, np.inf)])
        self.iterations = 0

        # nonbasic x at a finite bound (lower preferred), free columns at zero
        val = np.where(np.isfinite(prob.lower), prob.lower,
                       np.where(np.isfinite(prob.upper), prob.upper, 0.0))
        r = prob.A @ val
        s = np.clip(r, prob.row_lower, prob.row_upper)
        inside = np.abs(s - r) <= FEAS_TOL * (1.0 + np.abs(r))
        self.value = np.concatenate([val, s, np.abs(s - r)])
        # artificial column for row i is sign(s - r) * e_i so it stays >= 0
        sign = np.where(s - r >= 0, 1.0, -1.0)
        self.M[np.arange(m), n + m + np.arange(m)] = sign
        self.basis = np.where(inside, n + np.arange(m), n + m + np.arange(m))
        self.is_basic = np.zeros(n + 2 * m, dtype=bool)
        self.is_basic[self.basis] = True
        # unused artificials are pinned to zero from the start
        unused = n + m + np.arange(m)[inside]
        self.up[unused] = 0.0
        self.value[unused] = 0.0

    def _solve_basis(self, cost):
        B = self.M[:, self.basis]
        Binv = np.linalg.inv(B)
        nb = ~self.is_basic
        xb = -Binv @ (self.M[:, nb] @ self.value[nb])
        self.value[self.basis] = xb
        y = cost[self.basis] @ Binv
        d = cost - y @ self.M
        d[self.basis] = 0.0
        return Binv, y, d

    def _choose_entering(self, d, bland):
        lo, up, val = self.lo, self.up, self.value
        nb = ~self.is_basic & (up > lo)
        at_lo = np.isfinite(lo) & (val <= lo)
        at_up = np.isfinite(up) & (val >= up)
        can_inc = nb & (d < -OPT_TOL) & ~at_up
        can_dec = nb & (d > OPT_TOL) & ~at_lo
        cand = np.flatnonzero(can_inc | can_dec)
        if cand.size == 0:
            return None, 0.0
        j = int(cand[0]) if bland else int(cand[np.argmax(np.abs(d[cand]))])
        return j, (1.0 if can_inc[j] else -1.0)

    def _ratio_test(self, Binv, j, direction, bland):
        """Step length and leaving position for moving column ``j``."""
        w = Binv @ self.M[:, j]
        # basic values move by -direction * t * w
        delta = -direction * w
        xb = self.value[self.basis]
        lb, ub = self.lo[self.basis], self.up[self.basis]
        with np.errstate(divide="ignore", invalid="ignore"):
            t_dec = np.where((delta < -PIVOT_TOL) & np.isfinite(lb), (xb - lb) / -delta, np.inf)
            t_inc = np.where((delta > PIVOT_TOL) & np.isfinite(ub), (ub - xb) / delta, np.inf)
        t_rows = np.maximum(np.minimum(t_dec, t_inc), 0.0)
        t_flip = self.up[j] - self.lo[j]
        t_best = min(float(np.min(t_rows, initial=np.inf)), t_flip)
        if not np.isfinite(t_best):
            return np.inf, None, delta
        if t_flip <= t_best:
            return t_flip, None, delta
        ties = np.flatnonzero(t_rows <= t_best + FEAS_TOL)
        if bland:
            r = int(ties[np.argmin(self.basis[ties])])
        else:
            r = int(ties[np.argmax(np.abs(delta[ties]))])
        return float(t_rows[r]), r, delta

    def run(self, cost, max_iter):
        degenerate = 0
        bland = False
        while True:
            Binv, y, d = self._solve_basis(cost)
            j, direction = self._choose_entering(d, bland)
            if j is None:
                return "optimal", y, d, None
            t, r, delta = self._ratio_test(Binv, j, direction, bland)
            if not np.isfinite(t):
                ray = np.zeros_like(self.value)
                ray[j] = direction
                ray[self.basis] = delta
                return "unbounded", y, d, ray
            self.iterations += 1
            if self.iterations > max_iter:
                raise LpCyclingError("simplex iteration limit exceeded")
            degenerate = degenerate + 1 if t <= PIVOT_TOL else 0
            if degenerate > BLAND_AFTER:
                bland = True
            self.value[j] += direction * t
            if r is None:
                # bound flip, basis unchanged
                self.value[j] = self.up[j] if direction > 0 else self.lo[j]
                continue
            leaving = self.basis[r]
            new_val = self.value[leaving] + t * delta[r]
            self.value[leaving] = self.lo[leaving] if delta[r] < 0 else self.up[leaving]
            if not np.isfinite(self.value[leaving]):
                self.value[leaving] = new_val
            self.is_basic[leaving] = False
            self.is_basic[j] = True
            self.basis[r] = j


def solve_lp(problem: LpProblem, max_iter: int | None = None) -> LpSolution:
    """Solve ``problem`` to optimality, infeasibility or unboundedness.

    Pure and deterministic: the pivot rules involve no randomness, so
    identical inputs give bit-identical outputs.
    """
    sx = _Simplex(problem)
    m, n = sx.m, sx.n
    if max_iter is None:
        max_iter = 100 * (n + 2 * m) + 1000
    art = slice(n + m, n + 2 * m)

    if np.any(sx.is_basic[art] & (sx.value[art] > 0)):
        cost1 = np.zeros(n + 2 * m)
        cost1[art] = 1.0
        _, y1, _, _ = sx.run(cost1, max_iter)
        infeas = float(np.sum(sx.value[art]))
        scale = 1.0 + float(np.max(np.abs(sx.value[: n + m]), initial=0.0))
        if infeas > FEAS_TOL * scale * max(m, 1):
            return LpSolution(LpStatus.INFEASIBLE, iterations=sx.iterations,
                              infeasibility=infeas, farkas=-y1, problem=problem)
    # artificials are fixed at zero for Phase 2; basic ones leave on degenerate pivots
    sx.up[art] = 0.0
    sx.value[art] = np.minimum(sx.value[art], 0.0).clip(0.0)

    cost2 = np.concatenate([problem.c, np.zeros(2 * m)])
    outcome, y, d, ray = sx.run(cost2, max_iter)
    x = sx.value[:n].copy()
    if outcome == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, x=x, iterations=sx.iterations,
                          ray=ray[:n], problem=problem)
    # pin round-off at the bounds the basis claims
    x = np.clip(x, problem.lower, problem.upper)
    return LpSolution(
        LpStatus.OPTIMAL,
        x=x,
        # slack reduced costs equal the row multipliers, exactly zero for basic slacks
        duals=d[n: n + m].copy(),
        reduced_costs=d[:n].copy(),
        objective=float(problem.c @ x),
        iterations=sx.iterations,
        problem=problem,
    )
