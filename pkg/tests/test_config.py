import pytest

from hevolve.archive import Archive, Individual
from hevolve.config import (
    BUDGET_PRESETS,
    ProblemConfig,
    RunConfig,
    default_problem_config,
)
from hevolve.diversity import trajectory_reports
from hevolve.embedding import EmbeddingProvider
from hevolve.errors import ConfigError


def test_defaults_match_reported_settings():
    cfg = RunConfig()
    assert cfg.pop_init == 30
    assert cfg.pop_size == 10
    assert cfg.mutation_rate == 0.5
    assert cfg.max_tokens == BUDGET_PRESETS["main"] == 425_000
    assert cfg.temperature == 1.0
    assert cfg.alpha == 0.95
    assert len(cfg.roles) == 10
    assert (cfg.hs.memory_size, cfg.hs.hmcr, cfg.hs.par,
            cfg.hs.bandwidth, cfg.hs.max_iterations) == (5, 0.7, 0.5, 0.2, 5)
    assert BUDGET_PRESETS["diversity_analysis"] == 450_000


def test_problem_defaults():
    assert default_problem_config("bpo").size == 5000
    tsp = default_problem_config("tsp_gls")
    assert (tsp.n_instances, tsp.size, tsp.gls_iterations) == (64, 100, 1000)
    assert tsp.resolved_timeout() == 100.0
    op = default_problem_config("op_aco")
    assert (op.size, op.aco_iterations, op.max_len) == (50, 50, 3.0)
    assert op.resolved_timeout() == 50.0
    assert default_problem_config("bpo").resolved_timeout() == 50.0


def test_config_round_trip():
    cfg = RunConfig(
        problem=ProblemConfig(problem="tsp_gls", n_instances=4, size=8),
        pop_init=6, seed=9, max_generations=2,
    )
    again = RunConfig.from_dict(cfg.to_dict())
    assert again == cfg


def test_config_validation_errors():
    with pytest.raises(ConfigError):
        RunConfig(mutation_rate=1.5)
    with pytest.raises(ConfigError):
        RunConfig(pop_size=0)
    with pytest.raises(ConfigError):
        ProblemConfig(problem="sudoku")
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"no_such_field": 1})


def test_per_generation_diversity_variant():
    archive = Archive(run_id="r")
    sources = [
        "def f():\n    return 1\n",
        "def g(x):\n    return x * 2\n",
        "def h(y):\n    return y ** 3 - 7\n",
        "import math\n\ndef k(z):\n    return math.sqrt(z)\n",
    ]
    for i, (gen, src) in enumerate(zip([0, 0, 1, 1], sources)):
        archive.add(Individual(
            id=f"i{i}", source=src, objective=float(i), generation=gen,
            origin="init",
        ))
    embedder = EmbeddingProvider()
    cumulative = trajectory_reports(archive, 0.95, embedder)
    cohort = trajectory_reports(archive, 0.95, embedder, cumulative=False)
    assert [r.archive_size for r in cumulative] == [2, 4]
    assert [r.archive_size for r in cohort] == [2, 2]
