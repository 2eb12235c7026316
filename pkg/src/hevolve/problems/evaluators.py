"""Sandbox-backed heuristic evaluation for each benchmark.

An evaluator owns an instance set and scores heuristic source text by
loading it into a sandbox worker and driving the problem's solver with
wire calls. Every failure (syntax, banned import, runtime error, bad
shapes, timeouts) becomes an invalid EvaluationResult with a (kind,
message) tag instead of an exception: the evolution loop archives such
offspring and moves on.
"""

from __future__ import annotations

import ast
import time

import numpy as np

from . import EVAL_TIMEOUT_SECONDS, EvaluationResult
from . import bpo, op, tsp
from ..errors import ConfigError


def resolve_function_name(source: str, base: str) -> str | None:
    """Pick the function to call: exact ``{base}_v2`` wins, then the last
    def whose name starts with ``base``, then the last def at all."""
    try:
        tree = ast.parse(source)
    except (SyntaxError, ValueError):
        return None
    names = [
        node.name
        for node in tree.body
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef))
    ]
    if not names:
        return None
    if f"{base}_v2" in names:
        return f"{base}_v2"
    prefixed = [n for n in names if n.startswith(base)]
    if prefixed:
        return prefixed[-1]
    return names[-1]


def _runner_factory(command=None, timeout_seconds: float = 50.0):
    from heuristic_sandbox import SandboxRunner  # deferred: metric suites
    # must stay importable without the sandbox package installed

    return SandboxRunner(command=command, timeout_seconds=timeout_seconds)


class _Deadline:
    def __init__(self, seconds: float):
        self.expires = time.monotonic() + seconds

    def remaining(self) -> float:
        return self.expires - time.monotonic()


class SandboxEvaluator:
    """Shared load/score/failure plumbing; subclasses drive the solver."""

    problem = ""
    function_base = ""

    def __init__(self, instances, timeout_seconds: float | None = None,
                 sandbox_command=None):
        self.instances = instances
        self.timeout_seconds = (
            timeout_seconds
            if timeout_seconds is not None
            else EVAL_TIMEOUT_SECONDS[self.problem]
        )
        self.sandbox_command = sandbox_command
        self._runner = None

    def runner(self):
        if self._runner is None:
            self._runner = _runner_factory(
                command=self.sandbox_command, timeout_seconds=self.timeout_seconds
            )
        return self._runner

    def close(self):
        if self._runner is not None:
            self._runner.close()
            self._runner = None

    def evaluate(self, source: str, seed: int = 0) -> EvaluationResult:
        from heuristic_sandbox import SandboxError

        start = time.monotonic()
        fn_name = resolve_function_name(source, self.function_base)
        if fn_name is None:
            return EvaluationResult(
                objective=None,
                failure=("syntax", "no callable function definition found"),
                wall_seconds=time.monotonic() - start,
            )
        deadline = _Deadline(self.timeout_seconds)
        try:
            self.runner().load(source, fn_name, seed=seed)
            per_instance = self._score_instances(deadline)
        except SandboxError as exc:
            return EvaluationResult(
                objective=None,
                failure=(exc.kind, exc.message),
                wall_seconds=time.monotonic() - start,
            )
        except ValueError as exc:
            return EvaluationResult(
                objective=None,
                failure=("shape", str(exc)),
                wall_seconds=time.monotonic() - start,
            )
        return EvaluationResult(
            objective=float(np.mean(per_instance)),
            per_instance=per_instance,
            wall_seconds=time.monotonic() - start,
        )

    def _call(self, args, deadline: _Deadline):
        from heuristic_sandbox import SandboxError

        remaining = deadline.remaining()
        if remaining <= 0:
            # ensure the worker is not left mid-computation
            self.runner().session()._kill()
            raise SandboxError("timeout", "evaluation wall-clock limit reached")
        return self.runner().call(args, timeout=remaining)

    def _score_instances(self, deadline: _Deadline) -> list[float]:
        raise NotImplementedError


class BpoEvaluator(SandboxEvaluator):
    problem = "bpo"
    function_base = bpo.FUNCTION_BASE

    def _score_instances(self, deadline):
        per = []
        for inst in self.instances:
            scorer = lambda item, caps: np.asarray(
                self._call([float(item), caps.tolist()], deadline), dtype=float
            )
            bins = bpo.pack_online(inst.items, inst.capacity, scorer)
            lb = bpo.mt_lower_bound(inst.items, inst.capacity)
            per.append(-(lb / len(bins)))
        return per


class TspEvaluator(SandboxEvaluator):
    problem = "tsp_gls"
    function_base = tsp.FUNCTION_BASE

    def __init__(self, instances, oracle_lengths=None, iters: int = 1000,
                 perturbation_moves: int = 1, **kw):
        super().__init__(instances, **kw)
        self.iters = iters
        self.perturbation_moves = perturbation_moves
        if oracle_lengths is None:
            oracle_lengths = default_tsp_oracle(instances)
        if len(oracle_lengths) != len(instances):
            raise ConfigError("oracle length count does not match instances")
        self.oracle_lengths = list(oracle_lengths)

    def _score_instances(self, deadline):
        gaps = []
        for inst, opt in zip(self.instances, self.oracle_lengths):
            update_fn = lambda dist, tour, usage: np.asarray(
                self._call(
                    [dist.tolist(), np.asarray(tour).tolist(), usage.tolist()],
                    deadline,
                ),
                dtype=float,
            )
            found = tsp.gls_solve(
                inst, update_fn, self.iters, self.perturbation_moves
            )
            gaps.append((found - opt) / opt)
        return gaps


class OpEvaluator(SandboxEvaluator):
    problem = "op_aco"
    function_base = op.FUNCTION_BASE

    def __init__(self, instances, n_ants: int = 20, iterations: int = 50,
                 aco_seed: int = 0, **kw):
        super().__init__(instances, **kw)
        self.n_ants = n_ants
        self.iterations = iterations
        self.aco_seed = aco_seed

    def _score_instances(self, deadline):
        per = []
        for i, inst in enumerate(self.instances):
            dist = tsp.dist_matrix(inst.coords)
            promise = np.asarray(
                self._call(
                    [inst.prizes.tolist(), dist.tolist(), float(inst.max_len)],
                    deadline,
                ),
                dtype=float,
            )
            eta = op.validate_promise(promise, inst.n)
            rng = np.random.default_rng(
                np.random.SeedSequence([self.aco_seed, inst.seed, i])
            )
            prize, _ = op.aco_solve(
                inst, eta, n_ants=self.n_ants, iterations=self.iterations, rng=rng
            )
            per.append(-prize)
        return per


def default_tsp_oracle(instances) -> list[float]:
    """Exact lengths at desk scale, multi-start 2-opt reference beyond."""
    lengths = []
    for inst in instances:
        if inst.n <= 11:
            lengths.append(tsp.exact_tsp(inst))
        else:
            lengths.append(tsp.reference_length(inst))
    return lengths


def instance_seed(base: int, index: int) -> int:
    """Per-instance generator seed derived from the run seed."""
    return base * 1000 + index


def make_instances(pcfg, run_seed: int):
    """Instance set for a problem config; deterministic per seed."""
    base = pcfg.instance_seed if pcfg.instance_seed is not None else run_seed
    seeds = [instance_seed(base, i) for i in range(pcfg.n_instances)]
    if pcfg.problem == "bpo":
        return [bpo.gen_bpo(s, n_items=pcfg.size, capacity=pcfg.capacity) for s in seeds]
    if pcfg.problem == "tsp_gls":
        return [tsp.gen_tsp(s, n=pcfg.size) for s in seeds]
    if pcfg.problem == "op_aco":
        return [
            op.gen_op(s, n=pcfg.size, max_len=pcfg.max_len,
                      prize_convention=pcfg.prize_convention)
            for s in seeds
        ]
    raise ConfigError(f"unknown problem {pcfg.problem!r}")


def load_tsp100_reference(base_seed: int, count: int):
    """Shipped reference lengths (not optimal) for the default TSP100 set.
    Returns None when the requested set does not match the shipped file."""
    from importlib import resources

    try:
        text = (
            resources.files("hevolve.problems") / "data" / "tsp100_reference.txt"
        ).read_text(encoding="utf-8")
    except (FileNotFoundError, ModuleNotFoundError, OSError):
        return None
    header, *rows = [ln for ln in text.splitlines() if ln.strip()]
    meta = dict(
        part.split("=") for part in header.lstrip("# ").split() if "=" in part
    )
    if int(meta.get("seed", -1)) != base_seed or int(meta.get("count", -1)) < count:
        return None
    lengths = [float(ln.split()[1]) for ln in rows]
    return lengths[:count]


def make_evaluator(pcfg, run_seed: int, sandbox_command=None):
    """Sandbox evaluator over freshly generated instances."""
    instances = make_instances(pcfg, run_seed)
    timeout = pcfg.resolved_timeout()
    if pcfg.problem == "bpo":
        return BpoEvaluator(
            instances, timeout_seconds=timeout, sandbox_command=sandbox_command
        )
    if pcfg.problem == "tsp_gls":
        oracle = None
        if pcfg.size == 100:
            base = pcfg.instance_seed if pcfg.instance_seed is not None else run_seed
            oracle = load_tsp100_reference(base, pcfg.n_instances)
        return TspEvaluator(
            instances,
            oracle_lengths=oracle,
            iters=pcfg.gls_iterations,
            perturbation_moves=pcfg.perturbation_moves,
            timeout_seconds=timeout,
            sandbox_command=sandbox_command,
        )
    if pcfg.problem == "op_aco":
        return OpEvaluator(
            instances,
            n_ants=pcfg.n_ants,
            iterations=pcfg.aco_iterations,
            aco_seed=run_seed,
            timeout_seconds=timeout,
            sandbox_command=sandbox_command,
        )
    raise ConfigError(f"unknown problem {pcfg.problem!r}")
