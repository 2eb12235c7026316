"""Command-line entry point: run, analyze, eval.

`run` executes an experiment from a config file plus flag overrides and
writes its artifacts; `analyze` recomputes diversity trajectories from an
archive log and cross-checks them against the run's recorded values;
`eval` scores one heuristic file on freshly generated instances.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .archive import load_run
from .config import RunConfig, default_problem_config
from .diversity import (
    DIVERSITY_CSV_COLUMNS,
    read_diversity_csv,
    report_row,
    trajectory_reports,
    write_diversity_csv,
)
from .embedding import EmbeddingProvider
from .engine import EvolutionRun
from .errors import ConfigError, HevolveError, MalformedRecordError
from .llm import LlmBackend
from .problems import PROBLEM_NAMES
from .problems.evaluators import make_evaluator


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hevolve",
        description="Evolve heuristic programs with diversity instrumentation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute an evolution experiment")
    run.add_argument("--problem", choices=PROBLEM_NAMES)
    run.add_argument("--config", help="JSON config file (RunConfig fields)")
    run.add_argument("--backend", choices=["http", "mock"], default=None)
    run.add_argument("--mock-dir", help="scripted replies directory")
    run.add_argument("--budget-tokens", type=int)
    run.add_argument("--pop-init", type=int)
    run.add_argument("--pop-size", type=int)
    run.add_argument("--alpha", type=float)
    run.add_argument("--seed", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--max-generations", type=int)
    run.add_argument("--mutation-rate", type=float)
    run.add_argument("--n-instances", type=int)
    run.add_argument("--size", type=int, help="items (bpo) or nodes (tsp/op)")
    run.add_argument("--gls-iterations", type=int)
    run.add_argument("--output", default="run_output")

    analyze = sub.add_parser("analyze", help="recompute diversity from a run dir")
    analyze.add_argument("run_dir")
    analyze.add_argument("--tolerance", type=float, default=1e-9)

    ev = sub.add_parser("eval", help="score one heuristic file")
    ev.add_argument("heuristic_file")
    ev.add_argument("--problem", choices=PROBLEM_NAMES, required=True)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--n-instances", type=int)
    ev.add_argument("--size", type=int)
    ev.add_argument("--gls-iterations", type=int)
    return parser


def _resolve_run_config(args) -> tuple[RunConfig, LlmBackend]:
    errors: list[str] = []
    data: dict = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        data = json.loads(path.read_text(encoding="utf-8"))

    if args.problem:
        pdata = data.get("problem")
        if not isinstance(pdata, dict) or pdata.get("problem") != args.problem:
            data["problem"] = default_problem_config(args.problem).__dict__.copy()
    problem_overrides = {}
    if args.n_instances is not None:
        problem_overrides["n_instances"] = args.n_instances
    if args.size is not None:
        problem_overrides["size"] = args.size
    if args.gls_iterations is not None:
        problem_overrides["gls_iterations"] = args.gls_iterations
    if problem_overrides:
        pdata = dict(data.get("problem") or default_problem_config("bpo").__dict__)
        pdata.update(problem_overrides)
        data["problem"] = pdata

    for flag, key in (
        ("budget_tokens", "max_tokens"),
        ("pop_init", "pop_init"),
        ("pop_size", "pop_size"),
        ("alpha", "alpha"),
        ("seed", "seed"),
        ("workers", "workers"),
        ("max_generations", "max_generations"),
        ("mutation_rate", "mutation_rate"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            data[key] = value

    cfg = RunConfig.from_dict(data)

    backend_kind = args.backend or ("mock" if args.mock_dir else "http")
    if backend_kind == "mock":
        if not args.mock_dir:
            errors.append("mock backend needs --mock-dir")
        elif not Path(args.mock_dir).is_dir():
            errors.append(f"mock directory not found: {args.mock_dir}")
        backend = LlmBackend.mock(args.mock_dir or ".")
    else:
        backend = LlmBackend.from_env()
        if not backend.endpoint:
            errors.append("http backend needs LLM_ENDPOINT in the environment")
    if errors:
        raise ConfigError("\n".join(errors))
    return cfg, backend


def cmd_run(args) -> int:
    try:
        cfg, backend = _resolve_run_config(args)
    except (ConfigError, json.JSONDecodeError) as exc:
        for line in str(exc).splitlines():
            print(f"config error: {line}", file=sys.stderr)
        return 2
    run = EvolutionRun(cfg, backend, args.output)
    artifacts = run.run()
    print(json.dumps(artifacts.summary, indent=2, sort_keys=True))
    return 0


def cmd_analyze(args) -> int:
    run_dir = Path(args.run_dir)
    archive_path = run_dir / "archive.jsonl"
    if not archive_path.exists():
        print(f"no archive log at {archive_path}", file=sys.stderr)
        return 2
    try:
        archive = load_run(archive_path)
    except MalformedRecordError as exc:
        where = f" (line {exc.line_no})" if exc.line_no else ""
        print(f"corrupt archive log{where}: {exc}", file=sys.stderr)
        return 2

    alpha, include_invalid = 0.95, True
    embedder_cfg = None
    config_path = run_dir / "resolved_config.json"
    if config_path.exists():
        resolved = RunConfig.from_dict(json.loads(config_path.read_text()))
        alpha = resolved.alpha
        include_invalid = resolved.include_invalid
        embedder_cfg = resolved.embedder

    embedder = EmbeddingProvider(embedder_cfg)
    reports = trajectory_reports(archive, alpha, embedder, include_invalid)
    write_diversity_csv(reports, run_dir / "analysis.csv")

    recorded_path = run_dir / "diversity.csv"
    if recorded_path.exists():
        recorded = read_diversity_csv(recorded_path)
        recomputed = [report_row(r) for r in reports]
        problems = _compare_rows(recorded, recomputed, args.tolerance)
        if problems:
            for line in problems:
                print(f"mismatch: {line}", file=sys.stderr)
            return 1
        print(
            f"analysis.csv written; {len(reports)} timesteps agree with "
            f"recorded diversity within {args.tolerance}"
        )
    else:
        print(f"analysis.csv written; no recorded diversity.csv to compare")
    return 0


def _compare_rows(recorded: list[dict], recomputed: list[dict], tol: float):
    problems = []
    if len(recorded) != len(recomputed):
        problems.append(
            f"row count {len(recorded)} recorded vs {len(recomputed)} recomputed"
        )
        return problems
    for i, (a, b) in enumerate(zip(recorded, recomputed)):
        for col in DIVERSITY_CSV_COLUMNS:
            va, vb = float(a[col]), float(b[col])
            if abs(va - vb) > tol:
                problems.append(f"row {i} column {col}: {va} vs {vb}")
    return problems


def cmd_eval(args) -> int:
    path = Path(args.heuristic_file)
    if not path.exists():
        print(f"heuristic file not found: {path}", file=sys.stderr)
        return 2
    source = path.read_text(encoding="utf-8")
    pcfg = default_problem_config(args.problem)
    if args.n_instances is not None:
        pcfg.n_instances = args.n_instances
    if args.size is not None:
        pcfg.size = args.size
    if args.gls_iterations is not None:
        pcfg.gls_iterations = args.gls_iterations
    evaluator = make_evaluator(pcfg, args.seed)
    try:
        result = evaluator.evaluate(source, seed=args.seed)
    finally:
        evaluator.close()
    if not result.valid:
        kind, message = result.failure
        print(f"evaluation failed [{kind}] {message}", file=sys.stderr)
        return 1
    print(
        json.dumps(
            {
                "problem": args.problem,
                "seed": args.seed,
                "objective": result.objective,
                "per_instance": result.per_instance,
            },
            indent=2,
            sort_keys=True,
        )
    )
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "analyze":
            return cmd_analyze(args)
        if args.command == "eval":
            return cmd_eval(args)
    except HevolveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
