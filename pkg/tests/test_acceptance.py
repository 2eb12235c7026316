"""Acceptance suite: one test per release criterion, each printing a
PASS line with its measured runtime. Entropy, spanning-tree, clustering
and harmony-search checks run with no sandbox; the benchmark and
end-to-end checks drive the sandbox worker for real."""

import heapq
import itertools
import json
import math
import time

import numpy as np
import pytest

from hevolve.archive import load_run
from hevolve.cli import main
from hevolve.config import ProblemConfig, RunConfig
from hevolve.diversity import cdi, cluster_archive, minimum_spanning_tree, swdi
from hevolve.embedding import CodeEmbedding
from hevolve.engine import EvolutionRun
from hevolve.harmony import HarmonyConfig, ParameterizedHeuristic, hs_optimize
from hevolve.llm import LlmBackend
from hevolve.mockkit import write_mock_script
from hevolve.problems import bpo, op, tsp
from hevolve.problems.evaluators import (
    BpoEvaluator,
    OpEvaluator,
    TspEvaluator,
)

HAND_ENTROPY_2_1_1 = 1.0397207708399179  # -(.5 ln .5 + .25 ln .25 * 2)


def emb(vec, source_id=""):
    return CodeEmbedding(vector=np.asarray(vec, dtype=float), source_id=source_id)


def embs(points):
    return [emb(p, source_id=f"p{i:03d}") for i, p in enumerate(points)]


def report(name, started):
    print(f"ACCEPTANCE PASS: {name} ({time.monotonic() - started:.2f}s)")


def test_entropy_correctness():
    started = time.monotonic()
    part = cluster_archive(
        embs([[1, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]), alpha=0.95
    )
    assert part.sizes() == [2, 1, 1]
    assert swdi(part) == pytest.approx(HAND_ENTROPY_2_1_1, abs=1e-6)
    assert cdi(embs([[0.0], [1.0], [2.0], [4.0]])) == pytest.approx(
        HAND_ENTROPY_2_1_1, abs=1e-6
    )
    assert time.monotonic() - started < 1.0
    report("entropy correctness", started)


def _best_spanning_tree_lengths(points):
    """Exhaustive minimum via Pruefer enumeration; returns the edge
    lengths of the best labeled tree."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    if n == 2:
        return [float(dist[0, 1])]
    best_total = math.inf
    best_lengths = None
    for seq in itertools.product(range(n), repeat=n - 2):
        degree = [1] * n
        for v in seq:
            degree[v] += 1
        lengths = []
        leaves = [v for v in range(n) if degree[v] == 1]
        heapq.heapify(leaves)
        for v in seq:
            leaf = heapq.heappop(leaves)
            lengths.append(float(dist[leaf, v]))
            degree[v] -= 1
            if degree[v] == 1:
                heapq.heappush(leaves, v)
        u, w = heapq.heappop(leaves), heapq.heappop(leaves)
        lengths.append(float(dist[u, w]))
        total = math.fsum(sorted(lengths))
        if total < best_total:
            best_total = total
            best_lengths = lengths
    return best_lengths


def test_mst_oracle_equivalence():
    started = time.monotonic()
    rng = np.random.default_rng(2024)
    for trial in range(200):
        n = int(rng.integers(3, 8))
        dim = int(rng.integers(1, 4))
        points = rng.uniform(size=(n, dim))
        mst = minimum_spanning_tree(embs(points))
        oracle_lengths = _best_spanning_tree_lengths(points)
        # identical edge-length multisets give identical ordered sums
        assert math.fsum(sorted(e[2] for e in mst.edges)) == math.fsum(
            sorted(oracle_lengths)
        ), f"trial {trial}"
    assert time.monotonic() - started < 30.0
    report("MST equals exhaustive spanning-tree minimum (200 sets)", started)


def _unit(angle_degrees):
    a = math.radians(angle_degrees)
    return [math.cos(a), math.sin(a)]


def test_clustering_contract():
    started = time.monotonic()
    # pairwise cosines are cos of angle differences, computed by hand
    angles = [0.0, 10.0, 25.0, 35.0, 90.0]
    points = [_unit(a) for a in angles]

    # alpha = 0.95 ~ 18.19 degrees:
    # 10d joins 0d (cos10=.985); 25d fails vs 0d (cos25=.906) -> new;
    # 35d fails vs 0d cluster, joins 25d (cos10=.985); 90d isolated
    part = cluster_archive(embs(points), alpha=0.95)
    assert part.clusters == [["p000", "p001"], ["p002", "p003"], ["p004"]]

    # alpha = 0.5 ~ 60 degrees: first four mutually within 35d; 90d fails
    # vs 0d (cos90=0) and 10d (cos80=.17) -> singleton
    part = cluster_archive(embs(points), alpha=0.5)
    assert part.clusters == [["p000", "p001", "p002", "p003"], ["p004"]]

    # first-fit tie-break: C satisfies both existing clusters, joins the
    # first-created one. alpha between cos(20)=.9397 and cos(40)=.766
    tie = [_unit(0.0), _unit(40.0), _unit(20.0)]
    part = cluster_archive(embs(tie), alpha=0.9)
    assert part.clusters == [["p000", "p002"], ["p001"]]

    assert time.monotonic() - started < 5.0
    report("clustering alpha-rule and first-fit tie-break", started)


def test_bpo_feasibility_and_bound():
    started = time.monotonic()
    instances = [bpo.gen_bpo(seed * 1000, n_items=1000) for seed in range(5)]
    evaluator = BpoEvaluator(instances, timeout_seconds=50.0)
    try:
        result = evaluator.evaluate(bpo.SEED_SOURCE, seed=0)
        assert result.valid
        for score in result.per_instance:
            assert -1.0 <= score < 0.0
            # score = -(lb/n); within 5 percent of the bound means
            # n/lb <= 1.05, i.e. score <= -1/1.05
            assert score <= -1.0 / 1.05 + 1e-12

        # feasibility through the very same sandbox session
        runner = evaluator.runner()
        runner.load(bpo.SEED_SOURCE, "priority_v1", seed=0)
        inst = instances[0]
        scorer = lambda item, caps: np.asarray(
            runner.call([float(item), caps.tolist()]), dtype=float
        )
        bins = bpo.pack_online(inst.items, inst.capacity, scorer)
        assert all(sum(contents) <= inst.capacity for contents in bins)
        n, lb = len(bins), bpo.mt_lower_bound(inst.items, inst.capacity)
        assert n <= 1.05 * lb
    finally:
        evaluator.close()
    elapsed = time.monotonic() - started
    assert elapsed < 60.0
    report("BPO seed feasibility and lower-bound proximity", started)


IDENTITY_TSP_SOURCE = """import numpy as np

def update_edge_distance_v2(edge_distance: np.ndarray, local_opt_tour: np.ndarray, edge_n_used: np.ndarray) -> np.ndarray:
    return edge_distance
"""


def test_tsp_oracle_gap():
    started = time.monotonic()
    instances = [tsp.gen_tsp(seed, n=8) for seed in range(20)]
    oracle = [tsp.exact_tsp(inst) for inst in instances]
    for source in (IDENTITY_TSP_SOURCE, tsp.SEED_SOURCE):
        evaluator = TspEvaluator(
            instances, oracle_lengths=oracle, iters=200, timeout_seconds=100.0
        )
        try:
            result = evaluator.evaluate(source, seed=0)
        finally:
            evaluator.close()
        assert result.valid
        gaps = np.array(result.per_instance)
        assert np.all(gaps >= -1e-9)
        assert float(gaps.mean()) <= 0.05
    elapsed = time.monotonic() - started
    assert elapsed < 120.0
    report("TSP GLS gap vs brute-force oracle (identity and seed)", started)


def test_op_feasibility_and_oracle():
    started = time.monotonic()
    instances = [op.gen_op(seed, n=6) for seed in range(10)]
    evaluator = OpEvaluator(instances, n_ants=20, iterations=50, aco_seed=0)
    try:
        result = evaluator.evaluate(op.SEED_SOURCE, seed=0)
    finally:
        evaluator.close()
    assert result.valid
    for inst, score in zip(instances, result.per_instance):
        optimum = op.brute_force_op(inst)
        prize = -score
        assert prize <= optimum + 1e-9
        assert prize >= 0.8 * optimum

    # every sampled tour respects the length cap, return leg included
    for inst in instances:
        dist = tsp.dist_matrix(inst.coords)
        rng = np.random.default_rng(inst.seed)
        tau = np.ones((inst.n, inst.n))
        eta = np.ones((inst.n, inst.n))
        for _ in range(100):
            tour = op._construct_tour(rng, tau, eta, dist, inst.max_len)
            assert op.tour_total_length(tour, dist) <= inst.max_len + 1e-9
    elapsed = time.monotonic() - started
    assert elapsed < 120.0
    report("OP ACO feasibility and exhaustive-oracle bracket", started)


def test_harmony_search_oracle():
    started = time.monotonic()
    # 1-D quadratic against a dense grid oracle
    xs = np.arange(0.0, 1.0 + 1e-3, 1e-3)
    oracle_x = float(xs[int(np.argmin((xs - 0.3) ** 2))])
    ph = ParameterizedHeuristic(
        "def f(x: float = 0.5):\n    return x\n", {"x": (0.0, 1.0)}, "b"
    )
    cfg = HarmonyConfig(memory_size=5, max_iterations=200)
    for seed in range(20):
        values, _ = hs_optimize(
            ph, lambda v: (v["x"] - 0.3) ** 2, cfg, np.random.default_rng(seed)
        )
        assert abs(values["x"] - oracle_x) <= 0.05

    # 3-D separable quadratic within 5 percent of each range width
    ranges = {"a": (0.0, 1.0), "b": (0.0, 100.0), "c": (0.0, 2.0)}
    target = {"a": 0.3, "b": 30.0, "c": 0.6}
    ph3 = ParameterizedHeuristic(
        "def f(a=0, b=0, c=0):\n    return 0\n", ranges, "b"
    )

    def objective(v):
        return sum(
            ((v[k] - target[k]) / (ranges[k][1] - ranges[k][0])) ** 2 for k in v
        )

    cfg3 = HarmonyConfig(memory_size=5, max_iterations=500)
    values, _ = hs_optimize(ph3, objective, cfg3, np.random.default_rng(123))
    for k, (low, high) in ranges.items():
        assert abs(values[k] - target[k]) <= 0.05 * (high - low)
    assert time.monotonic() - started < 30.0
    report("harmony search quadratic recovery (1-D and 3-D)", started)


def _mock_run_args(tmp_path, out_name):
    mock_dir = tmp_path / "mock"
    if not mock_dir.exists():
        write_mock_script(mock_dir)
    return [
        "run", "--problem", "bpo", "--backend", "mock",
        "--mock-dir", str(mock_dir), "--seed", "7",
        "--pop-init", "6", "--pop-size", "3", "--max-generations", "3",
        "--n-instances", "2", "--size", "40",
        "--budget-tokens", "500000",
        "--output", str(tmp_path / out_name),
    ]


def test_end_to_end_mock_run(tmp_path, capsys):
    started = time.monotonic()
    assert main(_mock_run_args(tmp_path, "out1")) == 0
    out1 = tmp_path / "out1"

    archive = load_run(out1 / "archive.jsonl")
    origins = {e.origin for e in archive.entries}
    assert origins == {"seed", "init", "crossover", "mutation", "harmony_tuned"}
    gens = [e.generation for e in archive.entries]
    assert gens == sorted(gens)

    records = [
        json.loads(line) for line in (out1 / "run.jsonl").read_text().splitlines()
    ]
    bests = [r["best_objective"] for r in records]
    assert all(b is not None for b in bests)
    assert all(b2 <= b1 + 1e-12 for b1, b2 in zip(bests, bests[1:]))

    # independent recomputation agrees within 1e-9
    assert main(["analyze", str(out1), "--tolerance", "1e-9"]) == 0

    # a second identical invocation is byte-identical
    assert main(_mock_run_args(tmp_path, "out2")) == 0
    out2 = tmp_path / "out2"
    for name in ("archive.jsonl", "diversity.csv", "run.jsonl", "summary.json",
                 "best_heuristic.py"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name
    capsys.readouterr()
    elapsed = time.monotonic() - started
    assert elapsed < 120.0
    report("end-to-end scripted mock run", started)


def test_token_budget_graceful_exhaustion(tmp_path, capsys):
    started = time.monotonic()
    mock_dir = write_mock_script(tmp_path / "mock")
    cfg = RunConfig(
        problem=ProblemConfig(problem="bpo", n_instances=1, size=30),
        pop_init=6,
        pop_size=3,
        max_tokens=40,  # below the cost of the first generation request
        seed=1,
        max_generations=2,
    )
    run = EvolutionRun(cfg, LlmBackend.mock(mock_dir), tmp_path / "out")
    artifacts = run.run()
    assert artifacts.summary["tokens_used"] <= cfg.max_tokens
    assert "budget" in artifacts.summary["stop_reason"]
    assert artifacts.summary["best_objective"] is not None  # seed evaluated
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["tokens_used"] <= cfg.max_tokens
    elapsed = time.monotonic() - started
    assert elapsed < 10.0
    report("token budget exhaustion is graceful", started)
