"""Command-line front end.

Subcommands: ``simulate`` (replications of one configuration),
``threshold`` (cost curves of both priority rules over an exponent grid),
``sweep`` (priority or assignment comparison along one parameter),
``clearing`` (exact two-patient system), and ``tradeoff`` (queue-length
tradeoff scatter). Each run writes one CSV artifact plus a ``.manifest``
sidecar with every resolved parameter and the master seed.

Exit codes: 0 on success, 2 on flag or parameter errors, 1 on unexpected
runtime failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import List, Optional, Sequence

from . import __version__
from .clearing import (
    ClearingInstance,
    check_departure_ordering,
    clearing_costs,
    clearing_threshold,
    simulate_clearing,
)
from .costing import mean_se, run_many
from .experiments import (
    SweepSpec,
    assignment_sweep,
    priority_sweep,
    priority_threshold,
    tradeoff_curve,
)
from .model import PolicySpec, SystemParams, validate_params
from .output import SCHEMAS, write_csv, write_manifest

PAPER_THETA = "0,0.3380,0.2238,0.1481,0.0981"


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated number list: {text!r}")


def _int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")


def parse_grid(text: str) -> List[float]:
    """Grid flag: either 'start:stop:step' (inclusive) or 'v1,v2,...'."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(
                f"grid must be start:stop:step or a comma list, got {text!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise argparse.ArgumentTypeError(f"non-numeric grid bounds in {text!r}")
        if step <= 0 or stop < start:
            raise argparse.ArgumentTypeError(f"bad grid range {text!r}")
        n = int(round((stop - start) / step))
        grid = [round(start + k * step, 12) for k in range(n + 1)]
        if grid[-1] > stop + 1e-12:
            grid.pop()
        return grid
    return _float_list(text)


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model parameters")
    g.add_argument("--alpha", type=float, default=0.2, help="arrival probability per period")
    g.add_argument("--beta", type=float, default=0.8, help="service completion probability")
    g.add_argument("--gamma", type=float, default=0.1, help="content-to-needy probability")
    g.add_argument("--theta", type=_float_list, default=None,
                   help=f"comma list of arrival-type weights (default {PAPER_THETA}; "
                        "renormalized to sum 1)")
    g.add_argument("--no-renormalize-theta", action="store_true",
                   help="require theta to sum to exactly 1 instead of rescaling")
    g.add_argument("--stages", type=int, default=5, help="number of patient types R")
    g.add_argument("--nurses", type=int, default=1, help="number of nurses I")
    g.add_argument("--periods", type=int, default=10_000, help="horizon T in periods")
    g.add_argument("--warmup", type=int, default=2_000,
                   help="periods excluded from statistics")
    g.add_argument("--a", type=float, default=0.0, help="holding-cost exponent")
    r = p.add_argument_group("run control")
    r.add_argument("--reps", type=int, default=20, help="number of replications")
    r.add_argument("--seed", type=int, default=1, help="master seed (replication k uses seed+k)")
    r.add_argument("--workers", type=int, default=1, help="parallel replication workers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carequeue",
        description="Simulate multi-stage nurse care with patient reentrance and "
                    "compare priority and assignment policies.")
    parser.add_argument("--version", action="version", version=f"carequeue {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="replications of one configuration")
    _add_model_flags(p)
    p.add_argument("--priority", choices=("shortest_first", "longest_first"),
                   default="shortest_first")
    p.add_argument("--assignment", choices=("h1", "h2", "random"), default="random")
    p.add_argument("--out", default="simulate.csv")

    p = sub.add_parser("threshold", help="priority-rule cost curves over an exponent grid")
    _add_model_flags(p)
    p.add_argument("--a-grid", type=parse_grid, default=None,
                   help="exponent grid, start:stop:step or comma list (default 0:1:0.05)")
    p.add_argument("--out", default="threshold.csv")

    p = sub.add_parser("sweep", help="policy comparison along one parameter")
    _add_model_flags(p)
    p.add_argument("--compare", choices=("priority", "assignment"), required=True)
    p.add_argument("--param", choices=("alpha", "beta", "gamma"), required=True)
    p.add_argument("--values", type=_float_list, required=True,
                   help="comma list of values for the swept parameter")
    p.add_argument("--out", default="sweep.csv")

    p = sub.add_parser("clearing", help="exact two-patient clearing system")
    p.add_argument("--i", type=int, required=True, help="type of patient 1")
    p.add_argument("--j", type=int, required=True, help="type of patient 2 (>= i)")
    p.add_argument("--durations", default="unit",
                   help="'unit' for all-one durations (default)")
    p.add_argument("--service-durations", type=_int_list, default=None,
                   help="comma list of per-visit needy durations (length j)")
    p.add_argument("--content-durations", type=_int_list, default=None,
                   help="comma list of per-visit content durations (length j-1)")
    p.add_argument("--a-grid", type=parse_grid, default=None,
                   help="exponent grid (default 0:1:0.05)")
    p.add_argument("--threshold-tolerance", type=float, default=1e-6)
    p.add_argument("--out", default="clearing.csv")

    p = sub.add_parser("tradeoff", help="queue-length tradeoff scatter")
    _add_model_flags(p)
    p.add_argument("--alpha-grid", type=parse_grid, default=None,
                   help="default 0.05:0.25:0.05")
    p.add_argument("--beta-grid", type=parse_grid, default=None, help="default 0.8,0.9,1")
    p.add_argument("--gamma-grid", type=parse_grid, default=None, help="default 0.1:0.5:0.1")
    p.add_argument("--a-grid", type=parse_grid, default=None, help="default 0:1:0.1")
    p.add_argument("--out", default="tradeoff.csv")

    return parser


def _build_params(args, a: Optional[float] = None) -> SystemParams:
    theta = args.theta if args.theta is not None else _float_list(PAPER_THETA)
    raw_sum = math.fsum(theta)
    params = validate_params(
        alpha=args.alpha, beta=args.beta, gamma=args.gamma, theta=theta,
        R=args.stages, I=args.nurses, T=args.periods, warmup=args.warmup,
        a=args.a if a is None else a,
        renormalize_theta=not args.no_renormalize_theta,
    )
    if abs(raw_sum - 1.0) > 1e-12 and not args.no_renormalize_theta:
        print(f"theta renormalized by factor {raw_sum:.10g}")
    if not params.is_stable:
        print(f"warning: offered load {params.stability_ratio:.4f} >= 1, "
              "the system is unstable", file=sys.stderr)
    return params


def _params_manifest(params: SystemParams, args, extra: dict) -> dict:
    entries = {
        "version": __version__,
        "command": args.command,
        "alpha": params.alpha,
        "beta": params.beta,
        "gamma": params.gamma,
        "theta": list(params.theta),
        "stages": params.R,
        "nurses": params.I,
        "periods": params.T,
        "warmup": params.warmup,
        "a": params.a,
        "seed": args.seed,
        "reps": args.reps,
        "stability_ratio": params.stability_ratio,
        "out": args.out,
    }
    entries.update(extra)
    return entries


def _cmd_simulate(args) -> int:
    params = _build_params(args)
    policy = PolicySpec(args.priority, args.assignment)
    stats = run_many(params, policy, args.reps, args.seed, workers=args.workers)
    rows = [(s.replication, s.seed, s.total_cost, s.avg_queue_all,
             s.avg_queue_hi, s.discharges) for s in stats]
    write_csv(args.out, SCHEMAS["simulate"], rows)
    mean, se = mean_se(s.total_cost for s in stats)
    write_manifest(args.out + ".manifest", _params_manifest(params, args, {
        "priority": policy.priority,
        "assignment": policy.assignment,
        "schema": SCHEMAS["simulate"].tag,
        "J_mean": mean,
        "J_se": se,
    }))
    print(f"J = {mean:.10g} (se {se:.4g}) over {args.reps} replications -> {args.out}")
    return 0


def _cmd_threshold(args) -> int:
    params = _build_params(args)
    a_grid = args.a_grid if args.a_grid is not None else parse_grid("0:1:0.05")
    result = priority_threshold(params, a_grid, n_reps=args.reps,
                                base_seed=args.seed, workers=args.workers,
                                progress=lambda m: print(m, file=sys.stderr))
    rows = [(pt.a, pt.j_short, pt.se_short, pt.j_long, pt.se_long)
            for pt in result.points]
    write_csv(args.out, SCHEMAS["threshold"], rows)
    extra = {"schema": SCHEMAS["threshold"].tag, "a_grid": a_grid}
    if result.a_hat is None:
        print("no crossing of the two cost curves on the grid")
        extra["a_hat"] = "none"
    else:
        lo, hi = result.bracket
        print(f"cost curves cross at a_hat = {result.a_hat:.4f} "
              f"(bracketed by [{lo:g}, {hi:g}])")
        extra["a_hat"] = result.a_hat
        extra["bracket"] = [lo, hi]
    write_manifest(args.out + ".manifest", _params_manifest(params, args, extra))
    print(f"threshold curve -> {args.out}")
    return 0


_SWEEP_POLICY_ORDER = {
    "priority": ("shortest_first", "longest_first"),
    "assignment": ("h1", "h2", "random"),
}


def _cmd_sweep(args) -> int:
    if args.a not in (0.0, 1.0):
        raise ValueError("sweep requires --a 0 or --a 1")
    params = _build_params(args)
    spec = SweepSpec(param=args.param, grid=tuple(args.values), base=params,
                     n_reps=args.reps, base_seed=args.seed)
    progress = lambda m: print(m, file=sys.stderr)
    if args.compare == "priority":
        rows = priority_sweep(spec, workers=args.workers, progress=progress)
    else:
        rows = assignment_sweep(spec, workers=args.workers, progress=progress)
    out_rows = []
    for row in rows:
        for key in _SWEEP_POLICY_ORDER[args.compare]:
            mean, se = row.stats[key]
            out_rows.append((row.param, row.value, key, mean, se,
                             row.improvement_pct[key]))
        if row.flagged:
            print(f"note: {row.param}={row.value:g} has zero baseline cost; "
                  "improvements undefined")
    write_csv(args.out, SCHEMAS["sweep"], out_rows)
    write_manifest(args.out + ".manifest", _params_manifest(params, args, {
        "schema": SCHEMAS["sweep"].tag,
        "compare": args.compare,
        "param": args.param,
        "values": args.values,
    }))
    print(f"{args.compare} sweep over {args.param} -> {args.out}")
    return 0


def _cmd_clearing(args) -> int:
    if args.durations != "unit" and args.service_durations is None:
        raise ValueError(f"unknown --durations preset {args.durations!r}; "
                         "use 'unit' or give explicit duration lists")
    if args.service_durations is not None:
        s_ns = tuple(args.service_durations)
        s_cs = tuple(args.content_durations or ())
        inst = ClearingInstance(args.i, args.j, s_ns, s_cs)
    else:
        inst = ClearingInstance.unit(args.i, args.j)
    a_grid = args.a_grid if args.a_grid is not None else parse_grid("0:1:0.05")
    result = simulate_clearing(inst)
    report = check_departure_ordering(inst, result)
    rows = []
    for a in a_grid:
        c1, c2 = clearing_costs(inst, a, result=result)
        rows.append((inst.i, inst.j, a, c1, c2, c2 - c1, report.passed))
    write_csv(args.out, SCHEMAS["clearing"], rows)
    a_hat = clearing_threshold(inst, args.threshold_tolerance)
    print(f"departure ordering: {'pass' if report.passed else 'FAIL'} "
          f"(departures {report.d_1_1} <= {report.d_2_1} <= {report.d_1_2} and "
          f"{report.d_1_1} <= {report.d_2_2} <= {report.d_1_2})")
    print(f"cost threshold a_hat = {a_hat:.6g}")
    write_manifest(args.out + ".manifest", {
        "version": __version__,
        "command": "clearing",
        "i": inst.i,
        "j": inst.j,
        "service_durations": list(inst.s_ns),
        "content_durations": list(inst.s_cs),
        "a_grid": a_grid,
        "ordering_pass": report.passed,
        "a_hat": a_hat,
        "schema": SCHEMAS["clearing"].tag,
        "out": args.out,
    })
    print(f"clearing costs -> {args.out}")
    return 0


def _cmd_tradeoff(args) -> int:
    params = _build_params(args)
    alpha_grid = args.alpha_grid if args.alpha_grid is not None else parse_grid("0.05:0.25:0.05")
    beta_grid = args.beta_grid if args.beta_grid is not None else [0.8, 0.9, 1.0]
    gamma_grid = args.gamma_grid if args.gamma_grid is not None else parse_grid("0.1:0.5:0.1")
    a_grid = args.a_grid if args.a_grid is not None else parse_grid("0:1:0.1")
    rows = tradeoff_curve(params, alpha_grid, beta_grid, gamma_grid, a_grid,
                          n_reps=args.reps, base_seed=args.seed,
                          workers=args.workers,
                          progress=lambda m: print(m, file=sys.stderr))
    write_csv(args.out, SCHEMAS["tradeoff"], [
        (r.alpha, r.beta, r.gamma, r.a, r.rule_chosen,
         r.avg_queue_all, r.avg_queue_hi) for r in rows])
    write_manifest(args.out + ".manifest", _params_manifest(params, args, {
        "schema": SCHEMAS["tradeoff"].tag,
        "alpha_grid": alpha_grid,
        "beta_grid": beta_grid,
        "gamma_grid": gamma_grid,
        "a_grid": a_grid,
    }))
    print(f"{len(rows)} tradeoff points -> {args.out}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "threshold": _cmd_threshold,
    "sweep": _cmd_sweep,
    "clearing": _cmd_clearing,
    "tradeoff": _cmd_tradeoff,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - last-resort CLI boundary
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
