"""Run configuration: every knob of the evolution loop, the diversity
instrumentation, the tuning stage and the benchmark problems, with the
defaults the experiments used. A resolved config is fully explicit and is
persisted next to the run outputs so any run can be reproduced from its
snapshot alone."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

from .embedding import EmbedderConfig
from .errors import ConfigError
from .harmony import HarmonyConfig
from .prompts import PERSONAS
from .problems import EVAL_TIMEOUT_SECONDS, PROBLEM_NAMES

# token-budget presets used across the reported experiments
BUDGET_PRESETS = {
    "main": 425_000,
    "diversity_analysis": 450_000,
    "flash_reflection_ablation": 150_000,
}


@dataclass
class ProblemConfig:
    problem: str = "bpo"
    n_instances: int = 5
    size: int = 5000  # items for bpo, nodes for tsp/op
    capacity: int = 100  # bpo bin capacity
    gls_iterations: int = 1000
    perturbation_moves: int = 1
    n_ants: int = 20
    aco_iterations: int = 50
    max_len: float = 3.0
    prize_convention: str = "as_printed"
    instance_seed: int | None = None  # falls back to the run seed
    timeout_seconds: float | None = None  # falls back to the per-problem table

    def __post_init__(self):
        if self.problem not in PROBLEM_NAMES:
            raise ConfigError(f"unknown problem {self.problem!r}")
        if self.n_instances < 1 or self.size < 1:
            raise ConfigError("instance counts and sizes must be positive")

    def resolved_timeout(self) -> float:
        if self.timeout_seconds is not None:
            return self.timeout_seconds
        return EVAL_TIMEOUT_SECONDS[self.problem]


def default_problem_config(problem: str) -> ProblemConfig:
    if problem == "bpo":
        return ProblemConfig(problem="bpo", n_instances=5, size=5000)
    if problem == "tsp_gls":
        return ProblemConfig(problem="tsp_gls", n_instances=64, size=100)
    if problem == "op_aco":
        return ProblemConfig(problem="op_aco", n_instances=5, size=50)
    raise ConfigError(f"unknown problem {problem!r}")


@dataclass
class RunConfig:
    problem: ProblemConfig = field(default_factory=ProblemConfig)
    pop_init: int = 30
    pop_size: int = 10
    mutation_rate: float = 0.5
    max_tokens: int = 425_000
    temperature: float = 1.0
    alpha: float = 0.95
    include_invalid: bool = True
    hs: HarmonyConfig = field(default_factory=HarmonyConfig)
    embedder: EmbedderConfig = field(default_factory=EmbedderConfig)
    seed: int = 0
    roles: tuple[str, ...] = PERSONAS
    workers: int = 1
    max_generations: int | None = None
    sandbox_memory_mb: int = 1024

    def __post_init__(self):
        if self.pop_init < 1 or self.pop_size < 1:
            raise ConfigError("population sizes must be positive")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ConfigError("mutation_rate must lie in [0, 1]")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError("alpha must lie in [0, 1]")
        if self.max_tokens < 0:
            raise ConfigError("max_tokens must be non-negative")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        if not self.roles:
            raise ConfigError("at least one persona role is required")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["roles"] = list(self.roles)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "problem" in data and isinstance(data["problem"], dict):
            data["problem"] = ProblemConfig(**data["problem"])
        if "hs" in data and isinstance(data["hs"], dict):
            data["hs"] = HarmonyConfig(**data["hs"])
        if "embedder" in data and isinstance(data["embedder"], dict):
            data["embedder"] = EmbedderConfig(**data["embedder"])
        if "roles" in data:
            data["roles"] = tuple(data["roles"])
        return cls(**data)
