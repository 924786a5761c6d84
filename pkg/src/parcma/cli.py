"""Command-line harness emitting plot-ready CSV.

Three subcommands:

- ``run``: one optimization run, one CSV row per generation.
- ``convergence``: the same run across many seeds, with per-seed final
  values and a median/min/max summary.
- ``sweep``: a fixed-seed, fixed-budget run repeated for each worker
  count against an artificially expensive objective, reporting wall time,
  speedup S = T(1)/T(P), and efficiency E = S/P per row.

Exit codes: 0 on success, 1 for usage errors, 2 for runtime failures.
CSV goes to ``--output`` or standard out; diagnostics go to standard
error so piped CSV stays clean. Numeric cells use ``repr(float(v))`` so
equal runs produce byte-equal files (wall-clock columns excepted).
"""

from __future__ import annotations

import argparse
import os
import statistics
import sys
import time
from dataclasses import dataclass

from .errors import ParcmaError
from .objectives import benchmark, benchmark_names, make_expensive
from .parallel import WORKERS_ENV_VAR, speedup
from .strategy import STEP_SIZE_RULES, Termination, default_params, run

__all__ = ["RunConfig", "cmd_run", "cmd_sweep", "cmd_convergence", "main"]

RUN_HEADER = ("generation", "evals", "best_f_gen", "best_f_so_far", "sigma", "cond_C", "wall_ms")
SWEEP_HEADER = ("workers", "wall_s", "speedup", "efficiency", "final_f")
CONVERGENCE_HEADER = ("seed", "best_f")


@dataclass(frozen=True)
class RunConfig:
    """Everything one optimization run needs, as parsed from the flags."""

    problem: str
    dim: int
    max_evals: int
    seed: int = 0
    workers: int = 1
    sigma0: "float | str" = "auto"
    x0: tuple[float, ...] | None = None
    target_f: float | None = None
    step_size_rule: str = "clamped"
    output: str | None = None


class UsageError(ValueError):
    """Bad flag combination detected after argparse."""


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    return repr(float(value))


def _write_csv(path: str | None, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _check_budget(config: RunConfig) -> None:
    popsize = default_params(config.dim).popsize
    if config.max_evals < popsize:
        raise UsageError(
            f"--max-evals {config.max_evals} cannot cover one population "
            f"of {popsize} at dim {config.dim}"
        )


def _run_once(objective, config: RunConfig, *, seed=None, workers=None):
    return run(
        objective,
        None,
        Termination(max_evals=config.max_evals, target_f=config.target_f),
        x0=config.x0,
        sigma0=config.sigma0,
        seed=config.seed if seed is None else seed,
        workers=config.workers if workers is None else workers,
        step_size_variant=config.step_size_rule,
    )


def cmd_run(config: RunConfig) -> int:
    """One run; per-generation CSV plus a final summary line on stderr."""
    _check_budget(config)
    objective = benchmark(config.problem, config.dim)
    solution = _run_once(objective, config)
    rows = [
        (r.generation, r.evals, r.best_f_gen, r.best_f_so_far, r.sigma, r.cond_c, r.wall_ms)
        for r in solution.history
    ]
    _write_csv(config.output, RUN_HEADER, rows)
    print(
        f"{config.problem} dim={config.dim}: final f={float(solution.f)!r} "
        f"best f={float(solution.best_f)!r} "
        f"({solution.n_evals} evals, {solution.n_generations} generations)",
        file=sys.stderr,
    )
    return 0


def cmd_sweep(config: RunConfig, workers_list: list[int], work_units: int) -> int:
    """Repeat one fixed-seed run per worker count; CSV of timing ratios.

    Worker count 1 must be in the list: it is the baseline that defines
    speedup. Final f must agree bitwise across worker counts; any drift is
    a runtime failure, not a warning.
    """
    if 1 not in workers_list:
        raise UsageError("--workers-list must include 1 (the serial baseline)")
    if any(p < 1 for p in workers_list):
        raise UsageError(f"worker counts must be >= 1, got {workers_list}")
    if work_units < 0:
        raise UsageError(f"--work-units must be >= 0, got {work_units}")
    _check_budget(config)
    objective = make_expensive(benchmark(config.problem, config.dim), work_units)
    walls: dict[int, float] = {}
    finals: dict[int, float] = {}
    for p in workers_list:
        tic = time.perf_counter()
        solution = _run_once(objective, config, workers=p)
        walls[p] = time.perf_counter() - tic
        finals[p] = float(solution.f)
    rows = []
    for p in workers_list:
        s, e = speedup(walls[1], walls[p], p)
        rows.append((p, walls[p], s, e, finals[p]))
    drifted = [p for p in workers_list if finals[p] != finals[1]]
    if drifted:
        raise ParcmaError(
            f"final f diverged at workers={drifted}: "
            f"{[finals[p] for p in drifted]} vs {finals[1]} at workers=1"
        )
    _write_csv(config.output, SWEEP_HEADER, rows)
    return 0


def cmd_convergence(config: RunConfig, seeds: list[int]) -> int:
    """One run per seed; per-seed final best f plus a median/min/max tail."""
    if not seeds:
        raise UsageError("--seeds must name at least one seed")
    _check_budget(config)
    objective = benchmark(config.problem, config.dim)
    finals = [float(_run_once(objective, config, seed=s).best_f) for s in seeds]
    rows: list[tuple] = list(zip(seeds, finals))
    rows.append(("median", statistics.median(finals)))
    rows.append(("min", min(finals)))
    rows.append(("max", max(finals)))
    _write_csv(config.output, CONVERGENCE_HEADER, rows)
    return 0


def _positive_float(raw: str) -> float:
    value = float(raw)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {raw}")
    return value


def _sigma0(raw: str):
    if raw == "auto":
        return "auto"
    return _positive_float(raw)


def _float_list(raw: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in raw.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {raw!r}")


def _int_list(raw: str) -> list[int]:
    try:
        return [int(part) for part in raw.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {raw!r}")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; this harness reserves 2 for
    # runtime failures and reports usage problems as 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _workers_default() -> int:
    raw = os.environ.get(WORKERS_ENV_VAR)
    if raw is None:
        return 1
    value = int(raw)
    if value < 1:
        raise UsageError(f"{WORKERS_ENV_VAR} must be >= 1, got {raw}")
    return value


def _add_common(parser: argparse.ArgumentParser, *, dim_default: int, evals_default: int) -> None:
    parser.add_argument(
        "--problem", default="sphere", choices=benchmark_names(), help="benchmark name"
    )
    parser.add_argument("--dim", type=int, default=dim_default, help="problem dimension")
    parser.add_argument(
        "--max-evals", type=int, default=evals_default, help="objective evaluation budget"
    )
    parser.add_argument("--seed", type=int, default=0, help="random stream seed")
    parser.add_argument(
        "--sigma0",
        type=_sigma0,
        default="auto",
        help='initial step size, or "auto" for the bounds heuristic',
    )
    parser.add_argument(
        "--x0", type=_float_list, default=None, help="initial mean as comma-separated floats"
    )
    parser.add_argument(
        "--step-size-rule",
        choices=STEP_SIZE_RULES,
        default="clamped",
        help="step-size update variant",
    )
    parser.add_argument("--output", "-o", default=None, help="CSV path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="parcma", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="single run with per-generation CSV log")
    _add_common(p_run, dim_default=10, evals_default=5000)
    p_run.add_argument("--target-f", type=float, default=None, help="stop at this best f")
    p_run.add_argument("--workers", type=int, default=None, help="evaluation processes")

    p_conv = sub.add_parser("convergence", help="multi-seed study with summary rows")
    _add_common(p_conv, dim_default=10, evals_default=5000)
    p_conv.add_argument(
        "--seeds", type=_int_list, default=list(range(10)), help="comma-separated seeds"
    )
    p_conv.add_argument("--workers", type=int, default=None, help="evaluation processes")

    p_sweep = sub.add_parser("sweep", help="worker-count speedup sweep")
    _add_common(p_sweep, dim_default=100, evals_default=512)
    p_sweep.add_argument(
        "--workers-list",
        type=_int_list,
        default=[1, 2, 4],
        help="comma-separated worker counts; must include the baseline 1",
    )
    p_sweep.add_argument(
        "--work-units",
        type=int,
        default=100_000,
        help="busy-loop iterations added to every evaluation",
    )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        workers = getattr(args, "workers", None)
        if workers is None:
            workers = _workers_default() if args.command != "sweep" else 1
        elif workers < 1:
            raise UsageError(f"--workers must be >= 1, got {workers}")
        config = RunConfig(
            problem=args.problem,
            dim=args.dim,
            max_evals=args.max_evals,
            seed=args.seed,
            workers=workers,
            sigma0=args.sigma0,
            x0=args.x0,
            target_f=getattr(args, "target_f", None),
            step_size_rule=args.step_size_rule,
            output=args.output,
        )
        if args.command == "run":
            return cmd_run(config)
        if args.command == "convergence":
            return cmd_convergence(config, args.seeds)
        return cmd_sweep(config, args.workers_list, args.work_units)
    except (UsageError, ValueError) as exc:
        print(f"parcma: error: {exc}", file=sys.stderr)
        return 1
    except ParcmaError as exc:
        print(f"parcma: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
