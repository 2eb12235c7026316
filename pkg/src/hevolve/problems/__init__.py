"""Benchmark problems that score candidate heuristics.

Each problem module exposes instance generation, a solver that consumes a
heuristic callable, desk-scale exact oracles, and the prompt text blocks
(problem description, function description, signature, seed heuristic)
the engine renders into generation prompts.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class EvaluationResult:
    """Aggregate score of one heuristic over an instance set.

    ``objective`` is the mean of ``per_instance`` (lower is better) or
    None when evaluation failed; ``failure`` carries (kind, message).
    """

    objective: float | None
    per_instance: list[float] = field(default_factory=list)
    wall_seconds: float = 0.0
    failure: tuple[str, str] | None = None

    @property
    def valid(self) -> bool:
        return self.objective is not None


PROBLEM_NAMES = ("bpo", "tsp_gls", "op_aco")

# Table defaults: evaluation wall-clock limit per heuristic
EVAL_TIMEOUT_SECONDS = {"bpo": 50.0, "tsp_gls": 100.0, "op_aco": 50.0}
