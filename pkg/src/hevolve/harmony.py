"""Parameter tuning of elite heuristics with harmony search.

A chat request turns the elite's hardcoded numbers into named default
parameters plus a range per name; classic harmony search then optimizes
those values against the problem evaluator. Pitch adjustment is scaled by
the width of each parameter's range, since ranges can differ by orders of
magnitude. Tuned individuals are marked and never re-tuned.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass

import numpy as np

from .archive import Archive, Individual, Population
from .errors import ExtractionError, ParameterExtractionError, RangeParseError
from .llm import ChatRequest, LlmBackend, TokenBudget, chat, extract_code_and_ranges
from .prompts import parameter_extraction_system, parameter_extraction_user


@dataclass
class HarmonyConfig:
    memory_size: int = 5
    hmcr: float = 0.7
    par: float = 0.5
    bandwidth: float = 0.2
    max_iterations: int = 5

    def __post_init__(self):
        if not 0.0 <= self.hmcr <= 1.0:
            raise ValueError("hmcr must lie in [0, 1]")
        if not 0.0 <= self.par <= 1.0:
            raise ValueError("par must lie in [0, 1]")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.memory_size < 1:
            raise ValueError("memory_size must be at least 1")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")


@dataclass
class ParameterizedHeuristic:
    """Program text whose tunable values are named default parameters."""

    template_source: str
    ranges: dict[str, tuple[float, float]]
    base_id: str


def _template_parameter_names(source: str) -> set[str]:
    try:
        tree = ast.parse(source)
    except SyntaxError as exc:
        raise ParameterExtractionError(f"template does not parse: {exc}") from exc
    names: set[str] = set()
    for node in tree.body:
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            args = node.args
            for arg in args.args + args.posonlyargs + args.kwonlyargs:
                names.add(arg.arg)
    return names


def extract_parameterization(
    elite: Individual,
    backend: LlmBackend,
    budget: TokenBudget,
    validate,
) -> tuple[ParameterizedHeuristic, int]:
    """Ask the model for a parameterized template and ranges, then check
    that the template with all defaults still evaluates to a finite score.

    ``validate`` maps source text to an objective (None when invalid).
    Returns the heuristic plus the tokens the extraction cost. Raises
    ParameterExtractionError on any parse or validation failure; the
    caller marks the elite tuned either way so it is not retried.
    """
    if elite.objective is None:
        raise ParameterExtractionError("elite has no finite objective")
    if elite.tuned:
        raise ParameterExtractionError("elite was already tuned")
    request = ChatRequest(
        role_kind="generator",
        system_prompt=parameter_extraction_system(),
        user_prompt=parameter_extraction_user(elite.source),
    )
    reply, tokens = chat(request, backend, budget)
    try:
        template, ranges = extract_code_and_ranges(reply)
    except (ExtractionError, RangeParseError) as exc:
        raise ParameterExtractionError(f"reply unusable: {exc}") from exc
    declared = _template_parameter_names(template)
    missing = [name for name in ranges if name not in declared]
    if missing:
        raise ParameterExtractionError(
            f"ranges name parameters absent from the template: {missing}"
        )
    if validate(template) is None:
        raise ParameterExtractionError("template defaults do not evaluate")
    return ParameterizedHeuristic(template, ranges, elite.id), tokens


def specialize(ph: ParameterizedHeuristic, values: dict[str, float]) -> str:
    """Concrete source with the named defaults replaced by ``values``."""

    class _Rewriter(ast.NodeTransformer):
        def visit_FunctionDef(self, node):
            names = [a.arg for a in node.args.args]
            defaults = node.args.defaults
            offset = len(names) - len(defaults)
            for i, default in enumerate(defaults):
                pname = names[offset + i]
                if pname in values:
                    node.args.defaults[i] = ast.Constant(value=float(values[pname]))
            kw_names = [a.arg for a in node.args.kwonlyargs]
            for i, default in enumerate(node.args.kw_defaults):
                if default is not None and kw_names[i] in values:
                    node.args.kw_defaults[i] = ast.Constant(
                        value=float(values[kw_names[i]])
                    )
            self.generic_visit(node)
            return node

    tree = ast.parse(ph.template_source)
    tree = _Rewriter().visit(tree)
    ast.fix_missing_locations(tree)
    return ast.unparse(tree) + "\n"


@dataclass
class HarmonyMemory:
    """Rows of parameter vectors with their scores, best first."""

    names: list[str]
    rows: list[tuple[np.ndarray, float]]

    def best(self) -> tuple[np.ndarray, float]:
        return self.rows[0]

    def worst_index(self) -> int:
        return len(self.rows) - 1

    def values(self, row: np.ndarray) -> dict[str, float]:
        return {name: float(v) for name, v in zip(self.names, row)}


def hs_optimize(
    ph: ParameterizedHeuristic,
    evaluator,
    cfg: HarmonyConfig,
    rng: np.random.Generator,
) -> tuple[dict[str, float], float] | None:
    """Classic harmony search over ``ph.ranges``.

    ``evaluator`` maps a values dict to an objective (lower is better) or
    None for invalid candidates, which never enter memory. Returns the
    best (values, objective) found, or None when not a single candidate
    evaluated to a finite score.
    """
    names = sorted(ph.ranges)
    if not names:
        raise ParameterExtractionError("no parameter ranges to optimize")
    lows = np.array([ph.ranges[n][0] for n in names])
    highs = np.array([ph.ranges[n][1] for n in names])
    widths = highs - lows

    memory: list[tuple[np.ndarray, float]] = []
    for _ in range(cfg.memory_size):
        row = lows + rng.uniform(size=len(names)) * widths
        score = evaluator({n: float(v) for n, v in zip(names, row)})
        if score is not None:
            memory.append((row, float(score)))
    memory.sort(key=lambda r: r[1])

    for _ in range(cfg.max_iterations):
        candidate = np.empty(len(names))
        for d in range(len(names)):
            if memory and rng.uniform() < cfg.hmcr:
                row = memory[int(rng.integers(len(memory)))][0]
                value = row[d]
                if rng.uniform() < cfg.par:
                    value += rng.uniform(-cfg.bandwidth, cfg.bandwidth) * widths[d]
                    value = min(max(value, lows[d]), highs[d])
            else:
                value = lows[d] + rng.uniform() * widths[d]
            candidate[d] = value
        score = evaluator({n: float(v) for n, v in zip(names, candidate)})
        if score is None:
            continue
        if len(memory) < cfg.memory_size:
            memory.append((candidate, float(score)))
            memory.sort(key=lambda r: r[1])
        elif score < memory[-1][1]:
            memory[-1] = (candidate, float(score))
            memory.sort(key=lambda r: r[1])

    if not memory:
        return None
    best_row, best_score = memory[0]
    return {n: float(v) for n, v in zip(names, best_row)}, best_score


def apply_and_reinsert(
    ph: ParameterizedHeuristic,
    best_values: dict[str, float],
    best_objective: float,
    population: Population,
    archive: Archive,
    new_id: str,
    generation: int,
    token_cost: int = 0,
) -> Individual:
    """Archive the tuned specialization, add it to the working population,
    and mark the base elite tuned regardless of outcome."""
    source = specialize(ph, best_values)
    tuned = Individual(
        id=new_id,
        source=source,
        objective=best_objective,
        generation=generation,
        origin="harmony_tuned",
        tuned=True,
        token_cost=token_cost,
    )
    archive.add(tuned)
    population.members.append(tuned.id)
    archive.mark_tuned(ph.base_id)
    return tuned
