"""Command-line driver: ``consensus-lab {scenario,simulate,check,certify}``.

Exit codes: 0 every requested condition holds (or the command succeeded),
1 a condition fails, 5 a condition is inconclusive, 2 unknown scenario or
bad arguments, 3 I/O error, 4 numeric error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import diagnose
from .conditions import (
    ConditionParams,
    CutBalanceParams,
    Verdict,
    build_limit_graph_thm3,
    build_limit_graph_thm6,
    build_moreau_graph,
    certify,
    check_cut_balance,
    check_isc,
    estimate_limits,
)
from .dynamics import AgentState, SimConfig, simulate
from .errors import DomainError, NumericError, ScenarioNotFound
from .io import load_schedule, trajectory_to_dict, write_diameter_csv, write_json, write_trajectory_csv
from .scenarios import SCENARIOS, Scenario, get_scenario

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4, 5

CONDITION_FLAGS = ("moreau", "pe", "isc", "cut_balance", "thm3", "thm6")


def _emit(obj, args, name: str) -> None:
    if not args.no_meta:
        obj = {**obj, "meta": {"version": __version__,
                               "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat()}}
    text = json.dumps(obj, indent=2, sort_keys=True)
    if args.out:
        write_json(obj, Path(args.out) / name)
    print(text)


def _scenario_kwargs(args) -> dict:
    kw = {}
    name = args.scenario
    if name == "non_consensus_chain" and args.blocks is not None:
        kw["n_blocks"] = args.blocks
    if name == "complete_uniform" and args.n is not None:
        kw["n_agents"] = args.n
    if name == "building_block" and args.eta is not None:
        kw["eta"] = args.eta
    return kw


def _load(args) -> Scenario:
    if getattr(args, "schedule", None):
        sched = load_schedule(args.schedule)
        if not args.x0:
            raise DomainError("--schedule needs --x0")
        x0 = [float(v) for v in args.x0.split(",")]
        horizon = args.horizon or sched.horizon
        if horizon is None:
            raise DomainError("--schedule without a stored horizon needs --horizon")
        return Scenario(Path(args.schedule).stem, sched, AgentState(0.0, x0), float(horizon))
    if not args.scenario:
        raise DomainError("give a scenario name or --schedule")
    return get_scenario(args.scenario, **_scenario_kwargs(args))


def parse_tn(text: str | None, scenario: Scenario):
    """``block-boundaries``/``hint``, ``arith:a:h:n`` or a comma-separated list."""
    if text is None:
        return scenario.hints.get("t_seq")
    if text in ("block-boundaries", "hint"):
        seq = scenario.hints.get("t_seq")
        if seq is None:
            raise DomainError(f"scenario {scenario.name} has no sampling sequence")
        return seq
    if text.startswith("arith:"):
        try:
            a, h, n = text.split(":")[1:]
            return tuple(float(a) + float(h) * i for i in range(int(n)))
        except ValueError:
            raise DomainError(f"bad arithmetic sequence {text!r}") from None
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise DomainError(f"cannot parse --tn {text!r}") from None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_scenario(args) -> int:
    if args.action == "list":
        for name, (_, desc) in SCENARIOS.items():
            print(f"{name}\t{desc}")
        return EXIT_OK
    if not args.scenario:
        raise DomainError("scenario dump needs a name")
    sc = _load(args)
    data = sc.to_dict()
    if args.out:
        write_json(sc.schedule.to_dict(), Path(args.out) / f"{sc.name}.schedule.json")
    print(json.dumps(data, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_simulate(args) -> int:
    sc = _load(args)
    horizon = float(args.horizon or sc.horizon)
    t_eval = tuple(g.time for g in sc.golden if g.time <= horizon)
    cfg = SimConfig(max_step=args.max_step, keep_steps=args.step_log, t_eval=t_eval)
    traj = simulate(sc.schedule, sc.x0, horizon, cfg)
    rep = diagnose(traj, tol=args.tol, lower_bound=sc.diameter_lower_bound)

    golden = []
    for g in sc.golden:
        if g.state is None or g.time > horizon:
            continue
        err = float(np.abs(traj.state_at(g.time) - np.asarray(g.state)).max())
        golden.append({"time": g.time, "description": g.description, "max_error": err,
                       "ok": err <= g.tol})
    if args.out:
        out = Path(args.out)
        if args.format == "csv":
            write_trajectory_csv(traj, out)
        else:
            write_json(trajectory_to_dict(traj, args.step_log), out / "trajectory.json")
        write_diameter_csv(rep.times, rep.diameters, out / "diameter.csv")
        write_json(rep.to_dict(), out / "diagnostics.json")
    summary = {"scenario": sc.name, "horizon": horizon, "diagnostics": rep.to_dict(series=False),
               "golden": golden}
    _emit(summary, args, "summary.json")
    return EXIT_OK


def _params(args, sc: Scenario):
    hints = sc.hints
    T = args.t_window if args.t_window is not None else float(hints.get("T", 1.0))
    mu = args.mu if args.mu is not None else float(hints.get("mu", 0.5))
    horizon = float(args.horizon or sc.horizon)
    return T, mu, horizon


def _table(args, sc, T):
    t_seq = parse_tn(args.tn, sc)
    if not t_seq:
        raise DomainError("limit-graph checks need a sampling sequence (--tn)")
    window = args.window if args.window is not None else float(sc.hints.get("window", 2 * T))
    delta = args.delta if args.delta is not None else 1e-9
    return estimate_limits(sc.schedule, t_seq, window, delta=delta, lookback=args.lookback)


def cmd_check(args) -> int:
    sc = _load(args)
    T, mu, horizon = _params(args, sc)
    wanted = [c for c in CONDITION_FLAGS if getattr(args, c)] or list(CONDITION_FLAGS)
    stride = float(sc.hints["stride"]) if "stride" in sc.hints else None
    ConditionParams(T, mu, horizon, stride)  # validates the thresholds
    reports = []
    if "moreau" in wanted or "pe" in wanted:
        t_seq = parse_tn(args.tn, sc) if args.tn else None
        _, moreau, pe = build_moreau_graph(sc.schedule, T, mu, horizon, t_seq=t_seq, stride=stride)
        reports += [r for c, r in (("moreau", moreau), ("pe", pe)) if c in wanted]
    if "isc" in wanted:
        reports.append(check_isc(sc.schedule, T, mu, horizon=horizon, stride=stride)[0])
    if "cut_balance" in wanted:
        taus = sc.hints.get("cut_taus") or tuple(np.arange(0.0, horizon + 1e-12, T).tolist())
        K = args.k if args.k is not None else float(sc.hints.get("K", 1.0))
        M = args.m_bound if args.m_bound is not None else math.inf
        reports.append(check_cut_balance(sc.schedule, CutBalanceParams(tuple(taus), K, M)))
    if "thm3" in wanted or "thm6" in wanted:
        table = _table(args, sc, T)
        eps = args.eps if args.eps is not None else 1e-9
        if "thm3" in wanted:
            reports.append(build_limit_graph_thm3(table, eps, args.tail, sc.schedule)[1])
        if "thm6" in wanted:
            reports.append(build_limit_graph_thm6(table, eps)[1])
    verdicts = [r.verdict for r in reports]
    _emit({"scenario": sc.name, "reports": [r.to_dict() for r in reports]}, args, "report.json")
    if Verdict.FAILS in verdicts:
        return EXIT_FAIL
    if Verdict.INCONCLUSIVE in verdicts:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_certify(args) -> int:
    sc = _load(args)
    overrides = {"T": args.t_window, "mu": args.mu, "horizon": args.horizon, "eps": args.eps,
                 "delta": args.delta, "K": args.k, "M": args.m_bound, "window": args.window,
                 "tail": args.tail, "lookback": args.lookback}
    if args.tn:
        overrides["t_seq"] = parse_tn(args.tn, sc)
    rep = certify(sc, **overrides)
    _emit(rep.to_dict(), args, "certify.json")
    return EXIT_OK if rep.holds else EXIT_INCONCLUSIVE


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("scenario", nargs="?", help="built-in scenario name")
    p.add_argument("--schedule", help="schedule JSON file instead of a scenario")
    p.add_argument("--x0", help="comma-separated initial state (with --schedule)")
    p.add_argument("--horizon", "--t-end", dest="horizon", type=float)
    p.add_argument("--blocks", type=int, help="number of blocks (non_consensus_chain)")
    p.add_argument("--n", type=int, help="number of agents (complete_uniform)")
    p.add_argument("--eta", type=float, help="contraction parameter (building_block)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--no-meta", action="store_true", help="omit version and timestamp")


def _checker_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t-window", type=float, help="window length T")
    p.add_argument("--mu", type=float, help="window mass threshold")
    p.add_argument("--eps", type=float, help="limit-mass positivity threshold")
    p.add_argument("--delta", type=float, help="Cauchy tolerance for limits")
    p.add_argument("--tn", help="sampling sequence: list, 'block-boundaries', 'hint' or 'arith:a:h:n'")
    p.add_argument("--window", type=float, help="limit window W")
    p.add_argument("--tail", type=float, help="tail length excluded from the limit-graph grid")
    p.add_argument("--lookback", type=int, default=4, help="trailing terms compared for convergence")
    p.add_argument("--k", type=float, help="cut-balance ratio bound K")
    p.add_argument("--m-bound", type=float, help="cut-balance mass bound M")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="consensus-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scenario", help="list or dump built-in scenarios")
    p.add_argument("action", choices=("list", "dump"))
    _common(p)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("simulate", help="simulate a scenario and report diagnostics")
    _common(p)
    p.add_argument("--max-step", type=float, default=0.1)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--step-log", action="store_true", help="include per-step generators (json)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check", help="run selected condition checkers")
    _common(p)
    _checker_flags(p)
    p.add_argument("--moreau", action="store_true", help="windowed Moreau graph")
    p.add_argument("--pe", action="store_true", help="persistent excitation")
    p.add_argument("--isc", action="store_true", help="integral scrambling coefficient")
    p.add_argument("--cut-balance", action="store_true", help="cut-balance ratio on the partition")
    p.add_argument("--thm3", action="store_true", help="limit graph with a globally reachable node")
    p.add_argument("--thm6", action="store_true", help="limit graph joining every pair")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("certify", help="run every checker and list the certifying conditions")
    _common(p)
    _checker_flags(p)
    p.set_defaults(func=cmd_certify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioNotFound as exc:
        print(f"error: unknown scenario {exc.args[0]!r}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
