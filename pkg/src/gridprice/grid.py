"""Network case model, validation and PTDF construction.

Buses are indexed ``0..B-1``. Power is in MW, prices in $/MWh and line
susceptances in per unit on a base of 1, so a PTDF entry is unitless.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

__all__ = [
    "Line",
    "Generator",
    "User",
    "GridCase",
    "ValidationReport",
    "IllConditionedNetwork",
    "CaseFormatError",
    "validate_case",
    "build_ptdf",
    "load_case",
    "case_from_dict",
    "case_to_dict",
    "bundled_case_path",
]

# reduced susceptance matrices with a larger condition number are rejected
_MAX_CONDITION = 1e12


class CaseFormatError(ValueError):
    """Raised when a case file cannot be parsed into a :class:`GridCase`."""


class IllConditionedNetwork(ValueError):
    """Raised when the reduced susceptance matrix cannot be inverted reliably."""


@dataclass(frozen=True)
class Line:
    from_bus: int
    to_bus: int
    susceptance: float
    limit: float | None = None  # None means unbounded


@dataclass(frozen=True)
class Generator:
    bus: int
    cost: float | None  # None only in cost-free templates
    pmax: float | None = None  # None means no upper bound


@dataclass(frozen=True)
class User:
    bus: int
    xbar: float
    a: float = 1.0


@dataclass(frozen=True)
class GridCase:
    buses: tuple[int, ...]
    slack_bus: int
    lines: tuple[Line, ...]
    generators: tuple[Generator, ...]
    users: tuple[User, ...] = ()
    name: str = ""

    def __post_init__(self):
        # normalise lists to tuples so the case stays hashable and immutable
        for attr in ("buses", "lines", "generators", "users"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def costs(self) -> np.ndarray:
        return np.array([g.cost for g in self.generators], dtype=float)

    @property
    def user_buses(self) -> np.ndarray:
        return np.array([u.bus for u in self.users], dtype=int)

    def with_costs(self, costs) -> "GridCase":
        gens = tuple(
            Generator(g.bus, float(c), g.pmax) for g, c in zip(self.generators, costs)
        )
        return GridCase(self.buses, self.slack_bus, self.lines, gens, self.users, self.name)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(self.violations)


def _connected(n: int, edges) -> bool:
    if n == 0:
        return False
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for f, t in edges:
        parent[find(f)] = find(t)
    root = find(0)
    return all(find(i) == root for i in range(n))


def validate_case(case: GridCase, require_costs: bool = True) -> ValidationReport:
    """Check the structural invariants of a case.

    Never raises; every failed rule is appended to the report. With
    ``require_costs=False`` generators without a cost are accepted, which is
    what topology templates look like.
    """
    report = ValidationReport()
    v = report.violations
    n = len(case.buses)
    if n == 0:
        v.append("no buses")
        return report
    if list(case.buses) != list(range(n)):
        v.append("bus ids must be 0..B-1 in order")
    valid = set(range(n))
    if case.slack_bus not in valid:
        v.append(f"slack bus {case.slack_bus} is not a valid bus id")

    edges = []
    for k, ln in enumerate(case.lines):
        if ln.from_bus not in valid or ln.to_bus not in valid:
            v.append(f"line {k}: bad bus index ({ln.from_bus}, {ln.to_bus})")
            continue
        if ln.from_bus == ln.to_bus:
            v.append(f"line {k}: endpoints must be distinct")
        if not (math.isfinite(ln.susceptance) and ln.susceptance > 0):
            v.append(f"line {k}: nonpositive susceptance")
        if ln.limit is not None and not (ln.limit >= 0 and not math.isnan(ln.limit)):
            v.append(f"line {k}: negative flow limit")
        edges.append((ln.from_bus, ln.to_bus))
    if not _connected(n, edges):
        v.append("disconnected network")

    for k, g in enumerate(case.generators):
        if g.bus not in valid:
            v.append(f"generator {k}: bad bus index {g.bus}")
        if g.cost is None:
            if require_costs:
                v.append(f"generator {k}: missing cost")
        elif not math.isfinite(g.cost):
            v.append(f"generator {k}: non-finite cost")
        elif g.cost < 0:
            v.append(f"generator {k}: negative cost")
        if g.pmax is not None and not g.pmax >= 0:
            v.append(f"generator {k}: pmax must be >= 0")

    for k, u in enumerate(case.users):
        if u.bus not in valid:
            v.append(f"user {k}: bad bus index {u.bus}")
        if not math.isfinite(u.xbar):
            v.append(f"user {k}: non-finite xbar")
        if not (math.isfinite(u.a) and u.a > 0):
            v.append(f"user {k}: curvature a must be > 0")
    return report


def build_ptdf(case: GridCase) -> np.ndarray:
    """Return the ``L x B`` PTDF matrix of ``case``.

    Row ``l`` gives the flow on line ``l`` (from -> to) caused by one MW
    injected at each bus and withdrawn at the slack, so the slack column is
    zero and ``flows = ptdf @ injections`` for any balanced injection vector.
    """
    report = validate_case(case, require_costs=False)
    if not report.ok:
        raise ValueError(f"invalid case: {report}")
    n, m = case.n_buses, len(case.lines)
    incidence = np.zeros((m, n))
    b = np.empty(m)
    for k, ln in enumerate(case.lines):
        incidence[k, ln.from_bus] = 1.0
        incidence[k, ln.to_bus] = -1.0
        b[k] = ln.susceptance
    keep = np.array([i for i in range(n) if i != case.slack_bus], dtype=int)
    ptdf = np.zeros((m, n))
    if keep.size == 0:
        return ptdf
    bbus = incidence.T @ (b[:, None] * incidence)
    bred = bbus[np.ix_(keep, keep)]
    if np.linalg.cond(bred) > _MAX_CONDITION:
        raise IllConditionedNetwork("ill-conditioned network")
    ptdf[:, keep] = (b[:, None] * incidence[:, keep]) @ np.linalg.inv(bred)
    return ptdf


# ---------------------------------------------------------------- JSON I/O

def _opt_float(value):
    return None if value is None else float(value)


def case_from_dict(data: dict, name: str = "") -> GridCase:
    try:
        buses = tuple(int(b) for b in data["buses"])
        lines = tuple(
            Line(int(d["from"]), int(d["to"]), float(d["susceptance"]), _opt_float(d.get("limit")))
            for d in data["lines"]
        )
        gens = tuple(
            Generator(int(d["bus"]), _opt_float(d.get("cost")), _opt_float(d.get("pmax")))
            for d in data["generators"]
        )
        users = tuple(
            User(int(d["bus"]), float(d["xbar"]), float(d.get("a", 1.0)))
            for d in data.get("users", [])
        )
        slack = int(data["slack_bus"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CaseFormatError(f"malformed case: {exc!r}") from exc
    return GridCase(buses, slack, lines, gens, users, name=data.get("name", name))


def case_to_dict(case: GridCase) -> dict:
    out = {}
    if case.name:
        out["name"] = case.name
    out["buses"] = list(case.buses)
    out["slack_bus"] = case.slack_bus
    out["lines"] = [
        {"from": ln.from_bus, "to": ln.to_bus, "susceptance": ln.susceptance, "limit": ln.limit}
        for ln in case.lines
    ]
    out["generators"] = [{"bus": g.bus, "cost": g.cost, "pmax": g.pmax} for g in case.generators]
    out["users"] = [{"bus": u.bus, "xbar": u.xbar, "a": u.a} for u in case.users]
    return out


def bundled_case_path(name: str) -> Path:
    """Path of a case shipped with the package, e.g. ``"ieee14"`` or ``"cases/ieee14.json"``."""
    stem = Path(name).name
    if not stem.endswith(".json"):
        stem += ".json"
    return Path(str(resources.files("gridprice") / "cases" / stem))


def load_case(path) -> GridCase:
    """Load a JSON case file.

    Paths that do not exist on disk but name a bundled case (``cases/ieee14.json``)
    resolve to the copy shipped with the package.
    """
    p = Path(path)
    if not p.exists():
        alt = bundled_case_path(str(path))
        if p.parent.name in ("", "cases") and alt.exists():
            p = alt
        else:
            raise FileNotFoundError(f"case file not found: {path}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise CaseFormatError(f"{p}: {exc}") from exc
    return case_from_dict(data, name=p.stem)
