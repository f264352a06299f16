"""Command-line interface: run, verify, sweep, solve, gen-game."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import DEFAULT_BUDGET, MAX_SEED, BudgetExceeded, ConfigError, load_config, resolve_game
from .equilibrium import SolverError, closed_form_2x2, exact_nash, regularized_nash
from .experiment import (EXIT_BUDGET, EXIT_CERT, EXIT_CONFIG, EXIT_OK, default_jobs, run_experiment,
                         sweep_full, sweep_minimal, write_sweep)
from .game import GameError, generate_game
from .report import write_json
from .schedules import ScheduleError
from .suites import DEFAULT_TRIALS, SUITES, run_trials, summarize


class Parser(argparse.ArgumentParser):
    # Usage errors are configuration errors, not certificate failures.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _seed(text):
    value = int(text)
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (JSON)")
    common.add_argument("--seed", type=_seed, help="base seed (overrides the config)")
    common.add_argument("--jobs", type=_positive, default=None, help="worker processes")
    common.add_argument("--output", help="output directory (overrides the config)")
    common.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET,
                        help="maximum total steps (default 1e9)")

    parser = Parser(prog="sbrgames", description="Smoothed best-response dynamics in zero-sum games.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser("run", parents=[common], help="run a configured experiment")
    p.add_argument("--plot", action="store_true", help="also write plot.svg")

    p = sub.add_parser("verify", parents=[common], help="randomized certificate suites")
    p.add_argument("--suite", default="all", choices=SUITES + ("td", "all"))
    p.add_argument("--trials", type=_positive, help="trials per suite (default: per-suite)")

    p = sub.add_parser("sweep", parents=[common], help="iteration-complexity sweep")
    p.add_argument("--mode", choices=("full", "minimal"), required=True)
    p.add_argument("--epsilons", type=float, nargs="+", required=True)
    p.add_argument("--nu", type=float, default=0.5)
    p.add_argument("--init", choices=("corner", "uniform"), default="corner")
    p.add_argument("--game", help="game source when no config is given")

    p = sub.add_parser("solve", parents=[common], help="exact or regularized equilibrium")
    p.add_argument("--game", required=True, help="matching_pennies, rock_paper_scissors, "
                                                 "random:N1xN2[:SEED] or a JSON file")
    p.add_argument("--tau", type=float, help="temperature; omit for the exact equilibrium")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--closed-form", action="store_true", help="2x2 indifference formula")

    p = sub.add_parser("gen-game", parents=[common], help="write a game file")
    p.add_argument("--kind", default="random", choices=("random", "matching_pennies", "rock_paper_scissors"))
    p.add_argument("--n1", type=_positive, default=2)
    p.add_argument("--n2", type=_positive, default=2)
    return parser


def cmd_run(args) -> int:
    if not args.config:
        raise ConfigError("run needs --config")
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    out = args.output or cfg.output_dir
    summary, code = run_experiment(cfg, out, args.jobs or default_jobs(), args.budget, args.plot)
    ng = summary.get("final_ng_mean", summary["final_ng"])
    print(f"{cfg.mode} run finished: K={summary['K']} final NG={ng:.6g} -> {out}")
    if code == EXIT_CERT:
        print("certificate violation:", json.dumps(summary["certificates"]), file=sys.stderr)
    return code


def _suite_chunk(args):
    suite, seed, indices = args
    return run_trials(suite, seed, indices)


def cmd_verify(args) -> int:
    suites = SUITES + ("td",) if args.suite == "all" else (args.suite,)
    seed = args.seed or 0
    jobs = args.jobs or default_jobs()
    results = []
    for suite in suites:
        trials = args.trials or DEFAULT_TRIALS[suite]
        chunks = [(suite, seed, range(i, trials, jobs)) for i in range(min(jobs, trials))]
        if jobs == 1:
            raw = _suite_chunk(chunks[0])
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                raw = [item for part in pool.map(_suite_chunk, chunks) for item in part]
        res = summarize(suite, trials, raw)
        results.append(res)
        status = "pass" if res.ok else "FAIL"
        print(f"{suite}: {res.passed}/{res.trials} {status}  worst slack {res.worst_slack:.3e} "
              f"({res.worst_check})")
        for failure in res.failures[:1]:
            print("replay:", json.dumps(failure), file=sys.stderr)
    if args.output:
        Path(args.output).mkdir(parents=True, exist_ok=True)
        write_json(Path(args.output) / "verify.json",
                   {"seed": seed, "suites": [r.to_dict() for r in results]})
    return EXIT_OK if all(r.ok for r in results) else EXIT_CERT


def cmd_sweep(args) -> int:
    if args.config:
        game = resolve_game(load_config(args.config).game)
    else:
        game = resolve_game(args.game or "matching_pennies")
    for eps in args.epsilons:
        if not 0 < eps < 1:
            raise ConfigError(f"epsilon must lie in (0,1), got {eps}")
    out = args.output or "results"
    if args.mode == "full":
        rows = sweep_full(game, args.epsilons, args.init, args.budget)
    else:
        rows = sweep_minimal(game, args.epsilons, args.nu, args.budget, args.seed or 0)
    write_sweep(out, args.mode, rows)
    for row in rows:
        print(json.dumps(row))
    return EXIT_OK


def cmd_solve(args) -> int:
    game = resolve_game(args.game)
    if args.closed_form:
        eq = closed_form_2x2(game)
    elif args.tau is None:
        eq = exact_nash(game, args.tol or 1e-9)
    else:
        eq = regularized_nash(game, args.tau, args.tol or 1e-10)
    text = json.dumps(eq.to_dict(), sort_keys=True)
    print(text)
    if args.output:
        Path(args.output).mkdir(parents=True, exist_ok=True)
        write_json(Path(args.output) / "equilibrium.json", eq.to_dict())
    return EXIT_OK


def cmd_gen_game(args) -> int:
    game = generate_game(args.kind, args.n1, args.n2, args.seed or 0)
    text = json.dumps({"r1": game.r1.tolist()})
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "sweep": cmd_sweep, "solve": cmd_solve,
            "gen-game": cmd_gen_game}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, ScheduleError, GameError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_CERT


if __name__ == "__main__":
    sys.exit(main())
