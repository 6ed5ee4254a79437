"""Command-line entry point: ``gridprice {run,oracle,gen,validate}``.

Exit codes: 0 success, 1 run stopped at max iterations, 2 bad or missing
case file, 3 demand unservable, 4 grid oracle requested for too many users.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .dcopf import DEFAULT_VOLL, DemandUnservable, DispatchModel
from .dynamics import RunConfig, RunStatus, run
from .experiment import ExperimentSpec, cluster_values, dump_case, generate_case, initial_prices
from .grid import CaseFormatError, build_ptdf, case_to_dict, load_case, validate_case
from .oracle import MAX_GRID_USERS, OracleError, grid_search, joint_lp_kkt_check
from .users import UserSet

EXIT_OK = 0
EXIT_MAX_ITERS = 1
EXIT_INVALID = 2
EXIT_UNSERVABLE = 3
EXIT_TOO_MANY_USERS = 4

CLUSTER_TOL = 1e-4


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _err(msg: str) -> None:
    print(f"gridprice: {msg}", file=sys.stderr)


def _load_valid(path, require_costs=True):
    try:
        case = load_case(path)
    except (FileNotFoundError, CaseFormatError) as exc:
        raise CliError(str(exc), EXIT_INVALID) from exc
    report = validate_case(case, require_costs=require_costs)
    if not report.ok:
        raise CliError(f"{path}: {report}", EXIT_INVALID)
    if require_costs and not case.users:
        raise CliError(f"{path}: case has no users", EXIT_INVALID)
    return case


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get("GRIDPRICE_OUT") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2) + "\n")


def _config(args) -> RunConfig:
    voll = None
    if args.voll is not None:
        voll = DEFAULT_VOLL if args.voll <= 0 else args.voll
    return RunConfig(alpha=args.alpha, max_iters=args.max_iters, residual_tol=args.tol,
                     rng_seed=args.seed, voll=voll, record_every=args.record_every)


def _run_experiment(spec: ExperimentSpec):
    case = _load_valid(spec.case_path)
    ptdf = build_ptdf(case)
    users = UserSet.from_case(case)
    model = DispatchModel(case, ptdf, spec.config.voll)
    p0 = initial_prices(len(users), spec.price_init_range, spec.rng_seed)
    traj = run(case, ptdf, users, p0, spec.config, model=model)
    return case, ptdf, users, model, traj


def _summary(case, spec: ExperimentSpec, traj) -> dict:
    t = traj.terminal
    clusters = cluster_values(t.lmp, CLUSTER_TOL)
    return {
        "case": case.name,
        "seed": spec.rng_seed,
        "alpha": spec.config.alpha,
        "status": traj.status.value,
        "iterations": traj.iterations,
        "alpha_halvings": traj.halvings,
        "residual": t.residual,
        "p": t.p.tolist(),
        "x": t.x.tolist(),
        "lmp": t.lmp.tolist(),
        "J": t.J,
        "C": t.C,
        "lmp_cluster_count": len(clusters),
        "lmp_clusters": clusters,
        "message": traj.message,
    }


def cmd_run(args) -> int:
    spec = ExperimentSpec(args.case, price_init_range=tuple(args.price_range),
                          rng_seed=args.seed, config=_config(args), out_dir=str(_out_dir(args)))
    case, ptdf, users, model, traj = _run_experiment(spec)
    out = Path(spec.out_dir)
    if traj.records:
        with open(out / "trajectory.csv", "w", newline="") as fh:
            traj.write_csv(fh)
        _write_json(out / "summary.json", _summary(case, spec, traj))
    if args.dump_dispatch and traj.records:
        _write_json(out / "dispatch.json", model.evaluate(traj.terminal.x).to_dict())
    if traj.status is RunStatus.ERROR:
        raise CliError(traj.message or "demand unservable", EXIT_UNSERVABLE)
    print(f"{traj.status.value} after {traj.iterations} steps, residual {traj.terminal.residual:.3e}")
    return EXIT_OK if traj.status is RunStatus.CONVERGED else EXIT_MAX_ITERS


def cmd_oracle(args) -> int:
    case = _load_valid(args.case)
    users = UserSet.from_case(case)
    out = _out_dir(args)
    summary_path = out / "summary.json"
    summary = json.loads(summary_path.read_text()) if summary_path.exists() else None
    if summary is not None and len(summary.get("x", [])) != len(users):
        summary = None

    if args.method == "grid":
        if len(users) > MAX_GRID_USERS:
            raise CliError(f"grid oracle needs <= {MAX_GRID_USERS} users, case has {len(users)}",
                           EXIT_TOO_MANY_USERS)
        ptdf = build_ptdf(case)
        try:
            sol = grid_search(case, ptdf, users, pitch=args.pitch)
        except OracleError as exc:
            raise CliError(str(exc), EXIT_UNSERVABLE) from exc
        report = sol.to_dict()
        if summary is not None:
            gap = np.abs(np.array(summary["x"]) - sol.x)
            report["gap_to_dynamics"] = gap.tolist()
            report["max_gap"] = float(gap.max())
            report["C_gap"] = abs(summary["C"] - sol.C)
        _write_json(out / "oracle.json", report)
        print(f"grid minimiser x={np.round(sol.x, 6).tolist()} C={sol.C:.6f}")
        return EXIT_OK

    ptdf = build_ptdf(case)
    if summary is not None:
        x = np.array(summary["x"])
    else:
        spec = ExperimentSpec(args.case, rng_seed=args.seed, config=_config(args))
        *_, traj = _run_experiment(spec)
        x = traj.terminal.x
    try:
        rep = joint_lp_kkt_check(case, ptdf, users, x)
    except DemandUnservable as exc:
        raise CliError(str(exc), EXIT_UNSERVABLE) from exc
    _write_json(out / "oracle.json", rep.to_dict())
    print(f"stationarity residual {rep.residual:.3e}, probes {'pass' if rep.probes_pass else 'FAIL'}")
    return EXIT_OK


def cmd_gen(args) -> int:
    template = _load_valid(args.template, require_costs=False)
    lo, hi = args.cost_range
    if not lo <= hi:
        raise CliError("cost range must satisfy lo <= hi", EXIT_INVALID)
    case = generate_case(template, (lo, hi), args.seed)
    if args.output:
        dump_case(case, args.output)
    else:
        sys.stdout.write(json.dumps(case_to_dict(case), indent=2) + "\n")
    return EXIT_OK


def cmd_validate(args) -> int:
    case = _load_valid(args.case, require_costs=not args.template)
    print(f"{args.case}: ok ({case.n_buses} buses, {len(case.lines)} lines, "
          f"{len(case.generators)} generators, {case.n_users} users)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridprice", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def run_flags(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--alpha", type=float, default=0.05)
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--max-iters", type=int, default=20000)
        p.add_argument("--voll", type=float, default=None,
                       help="enable load shedding at this price ($/MWh); <= 0 uses the default")
        p.add_argument("--record-every", type=int, default=1)
        p.add_argument("--out", default=None, help="output directory (default $GRIDPRICE_OUT or .)")
        p.add_argument("--price-range", type=float, nargs=2, default=(5.0, 15.0))

    p = sub.add_parser("run", help="run the price iteration on a case")
    p.add_argument("case")
    run_flags(p)
    p.add_argument("--dump-dispatch", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", help="certify a demand profile against the planner problem")
    p.add_argument("case")
    p.add_argument("--method", choices=["grid", "kkt"], default="grid")
    p.add_argument("--pitch", type=float, default=1e-3)
    run_flags(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen", help="fill a topology template with random generator costs")
    p.add_argument("template")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cost-range", type=float, nargs=2, default=(5.0, 20.0))
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", help="check a case file")
    p.add_argument("case")
    p.add_argument("--template", action="store_true", help="allow missing generator costs")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        _err(str(exc))
        return exc.code
    except DemandUnservable as exc:
        _err(str(exc))
        return EXIT_UNSERVABLE


if __name__ == "__main__":
    sys.exit(main())
