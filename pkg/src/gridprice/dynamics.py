"""Operator price iteration driven by LMP subgradients.

Each operator step the users best-respond to the current prices, the
operator dispatches the resulting demand, and prices move toward the LMPs::

    x_k     = x*(p_k)
    lam_k   = lmp(x_k)                  (one element of dJ(x_k))
    p_{k+1} = p_k + alpha * (lam_k - p_k)

This is explicit Euler on the inclusion ``dp/dt in dJ(x*(p)) - p``. A fixed
point ``p = lam`` makes ``x*(p)`` the minimiser of total disutility plus
system cost.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field

import numpy as np

from .dcopf import DemandUnservable, DispatchModel
from .users import UserSet

__all__ = [
    "RunStatus",
    "RunConfig",
    "StepRecord",
    "Trajectory",
    "step",
    "run",
    "lyapunov_series",
]


class RunStatus(enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    ERROR = "Error"


@dataclass(frozen=True)
class RunConfig:
    alpha: float = 0.05
    max_iters: int = 20000
    residual_tol: float = 1e-6
    rng_seed: int | None = None
    voll: float | None = None
    record_every: int = 1
    # chattering guard: halve alpha when C has not dropped over this many steps
    chatter_window: int = 500
    max_halvings: int = 6

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass
class StepRecord:
    k: int
    p: np.ndarray
    x: np.ndarray
    lmp: np.ndarray
    J: float
    C: float
    residual: float
    alpha: float


@dataclass
class Trajectory:
    records: list[StepRecord] = field(default_factory=list)
    status: RunStatus = RunStatus.MAX_ITERS
    iterations: int = 0
    halvings: int = 0
    message: str = ""

    def __len__(self) -> int:
        return len(self.records)

    @property
    def terminal(self) -> StepRecord:
        return self.records[-1]

    @property
    def converged(self) -> bool:
        return self.status is RunStatus.CONVERGED

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    @property
    def C(self) -> np.ndarray:
        return self.column("C")

    @property
    def residuals(self) -> np.ndarray:
        return self.column("residual")

    @property
    def prices(self) -> np.ndarray:
        return self.column("p")

    @property
    def demands(self) -> np.ndarray:
        return self.column("x")

    def write_csv(self, fh) -> None:
        """Write ``k, p_*, x_*, J, C, V, residual`` rows with round-trip float repr."""
        n = self.records[0].p.size if self.records else 0
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k"] + [f"p_{i}" for i in range(n)] + [f"x_{i}" for i in range(n)]
                   + ["J", "C", "V", "residual"])
        V = lyapunov_series(self) if self.records else []
        for r, v in zip(self.records, V):
            w.writerow([r.k] + [repr(float(a)) for a in r.p] + [repr(float(a)) for a in r.x]
                       + [repr(r.J), repr(r.C), repr(float(v)), repr(r.residual)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def _evaluate(model: DispatchModel, users: UserSet, p: np.ndarray, k: int, alpha: float) -> StepRecord:
    x = users.best_response(p)
    d = model.evaluate(x)
    C = users.total(x) + d.value
    residual = float(np.max(np.abs(d.lmp - p)))
    return StepRecord(k, p.copy(), x, d.lmp, d.value, C, residual, alpha)


def step(case, ptdf, users: UserSet, p, alpha: float, voll: float | None = None,
         model: DispatchModel | None = None):
    """One Euler step. Returns ``(p_next, record)`` where ``record`` describes ``p``."""
    model = model or DispatchModel(case, ptdf, voll)
    p = np.asarray(p, dtype=float)
    rec = _evaluate(model, users, p, 0, alpha)
    return p + alpha * (rec.lmp - p), rec


def run(case, ptdf, users: UserSet, p0, cfg: RunConfig | None = None,
        model: DispatchModel | None = None) -> Trajectory:
    """Iterate :func:`step` from ``p0`` until the fixed-point residual drops below tolerance.

    The terminal record is always stored, whatever ``record_every`` is. If
    the demand becomes unservable the run stops with status ``Error`` and the
    last servable state as its terminal record.
    """
    cfg = cfg or RunConfig()
    model = model or DispatchModel(case, ptdf, cfg.voll)
    p = np.asarray(p0, dtype=float).copy()
    if p.shape != (len(users),) or not np.all(np.isfinite(p)):
        raise ValueError("p0 must be a finite vector with one price per user")

    traj = Trajectory()
    alpha = cfg.alpha
    window_start_C = None
    since_halving = 0
    last = None
    for k in range(cfg.max_iters):
        try:
            rec = _evaluate(model, users, p, k, alpha)
        except DemandUnservable as exc:
            traj.status = RunStatus.ERROR
            traj.message = str(exc)
            if last is not None and (not traj.records or traj.records[-1] is not last):
                traj.records.append(last)
            traj.iterations = k
            return traj
        last = rec
        traj.iterations = k + 1
        if rec.residual <= cfg.residual_tol:
            traj.records.append(rec)
            traj.status = RunStatus.CONVERGED
            return traj
        if k % cfg.record_every == 0:
            traj.records.append(rec)

        # chattering guard
        if since_halving == 0:
            window_start_C = rec.C
        since_halving += 1
        if since_halving > cfg.chatter_window:
            if rec.C >= window_start_C - 1e-12 and traj.halvings < cfg.max_halvings:
                alpha *= 0.5
                traj.halvings += 1
            since_halving = 0

        p = p + alpha * (rec.lmp - p)

    if traj.records[-1] is not last:
        traj.records.append(last)
    traj.status = RunStatus.MAX_ITERS
    return traj


def lyapunov_series(traj: Trajectory) -> np.ndarray:
    """``V_k = C_k - C_ref`` with ``C_ref`` the terminal value of a converged run, else ``min C``."""
    if not traj.records:
        raise ValueError("empty trajectory")
    C = traj.C
    ref = C[-1] if traj.converged else np.min(C)
    V = C - ref
    if traj.converged:
        V[-1] = 0.0
    return V
