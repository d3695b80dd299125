"""``stacksat`` command line: solve, sweep, rm, ne and validate.

Machine-readable output (JSON, or CSV when writing to ``-``) goes to stdout
and human-oriented summaries go to stderr. Actions are 1-based throughout.

Exit codes: 0 success, 1 malformed input or flags, 2 solver anomaly,
3 file I/O failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from stacksat.errors import AllInfeasibleError, IterationLimitError, StackSatError
from stacksat.game import BimatrixGame, find_pure_ne
from stacksat.regret import MODES, POST_CONVERGENCE, RMConfig, export_trace_csv, run_rm

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; that code is reserved for solver anomalies here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _read_game(path: str) -> BimatrixGame:
    # OSError propagates to main() and maps to EXIT_IO
    with open(path) as fh:
        text = fh.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise UsageError(f"{path}: expected a JSON object with u_leader and u_follower")
    return BimatrixGame.from_dict(raw)


def _workers() -> int:
    value = os.environ.get("STACKSAT_THREADS", "1")
    try:
        workers = int(value)
    except ValueError:
        raise UsageError(f"STACKSAT_THREADS must be an integer, got {value!r}") from None
    if workers < 0:
        raise UsageError("STACKSAT_THREADS must be >= 0")
    return workers


def cmd_solve(args) -> int:
    from stacksat import stackelberg as sb

    if args.method == "single-lp" and args.satisfaction is not None:
        raise UsageError("--method single-lp and --satisfaction are mutually exclusive")
    game = _read_game(args.game)
    th = args.satisfaction
    if args.method == "pure":
        sol = sb.pure_commit_standard(game) if th is None else sb.pure_commit_sat(game, th)
    elif args.method == "single-lp":
        sol = sb.solve_single_lp_standard(game)
    else:
        sol = sb.solve_multi_lp_standard(game) if th is None else sb.solve_multi_lp_sat(game, th)
    report = sol.to_dict()
    _emit(report)
    _note(
        f"{args.method}: follower plays {report['follower_action']}, "
        f"leader utility {sol.leader_utility:.4f}, follower utility {sol.follower_utility:.4f}"
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    from stacksat.experiments import SweepConfig, export_csv, run_sweep

    try:
        cfg = SweepConfig(
            n_leader=args.nl,
            n_follower=args.nf,
            n_thresholds=args.thresholds,
            n_trials=args.trials,
            rng_seed=args.seed,
            mode=args.mode,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    workers = _workers()
    result = run_sweep(cfg, workers=workers)
    if args.out == "-":
        export_csv(result, sys.stdout)
    else:
        export_csv(result, args.out)
    _note(
        f"{cfg.n_trials} trials of {cfg.n_leader}x{cfg.n_follower}: "
        f"avg max {result.avg_max_utility:.4f}, avg standard {result.avg_std_leader_utility:.4f}, "
        f"{len(result.counterexamples)} satisfaction-below-standard cases"
    )
    return EXIT_OK


def cmd_rm(args) -> int:
    try:
        cfg = RMConfig(
            mode=args.mode,
            max_stages=args.stages,
            spr_tolerance=args.tol,
            ce_constant_c=args.c,
            rng_seed=args.seed,
            post_convergence=args.post_convergence,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    game = _read_game(args.game)
    trace = run_rm(game, cfg)
    if args.trace_out:
        export_trace_csv(trace, args.trace_out)
    report = trace.summary(game)
    _emit(report)
    status = f"converged at stage {trace.converged_at}" if trace.converged_at else "did not converge"
    _note(f"{cfg.mode}: {status}; modal joint action {tuple(report['modal_joint_action'])}")
    return EXIT_OK


def cmd_ne(args) -> int:
    game = _read_game(args.game)
    pairs = [[s + 1, t + 1] for s, t in find_pure_ne(game)]
    _emit({"pure_nash_equilibria": pairs})
    _note(f"{len(pairs)} pure equilibria")
    return EXIT_OK


def cmd_validate(args) -> int:
    game = _read_game(args.game)
    _emit({"valid": True, "n_leader": game.n_leader, "n_follower": game.n_follower})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stacksat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="optimal strategy to commit to")
    p.add_argument("game")
    p.add_argument("--method", choices=("multi-lp", "single-lp", "pure"), default="multi-lp")
    p.add_argument("--satisfaction", type=float, metavar="TH", help="satisfaction threshold for the follower")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="Monte Carlo threshold sweep over random games")
    p.add_argument("--nl", type=int, default=10)
    p.add_argument("--nf", type=int, default=5)
    p.add_argument("--thresholds", type=int, default=40)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("mixed", "pure"), default="mixed")
    p.add_argument("--out", default="-", help="CSV destination, '-' for stdout")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rm", help="simulate regret matching")
    p.add_argument("game")
    p.add_argument("--mode", choices=MODES, default="leader-cond-rm+follower-br")
    p.add_argument("--stages", type=int, default=10_000)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--c", type=float, default=None, help="inertia constant (default: automatic)")
    p.add_argument("--post-convergence", choices=POST_CONVERGENCE, default="uniform")
    p.add_argument("--trace-out", help="write the per-stage trace as CSV")
    p.set_defaults(func=cmd_rm)

    for name, func, text in (
        ("ne", cmd_ne, "list pure Nash equilibria"),
        ("validate", cmd_validate, "check a game file"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("game")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (AllInfeasibleError, IterationLimitError) as exc:
        _note(f"stacksat: solver anomaly: {exc}")
        return EXIT_SOLVER
    except (UsageError, StackSatError, ValueError, IndexError) as exc:
        _note(f"stacksat: error: {exc}")
        return EXIT_INPUT
    except OSError as exc:
        _note(f"stacksat: I/O error: {exc}")
        return EXIT_IO
