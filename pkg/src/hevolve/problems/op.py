"""Orienteering instances solved by ant colony optimization.

Candidates map (node prizes, distance matrix, tour-length cap) to a
promise matrix; ants build depot-anchored tours choosing the next node
with probability proportional to pheromone times promise among the nodes
still reachable-and-returnable within the cap. Pheromone evaporates each
iteration and the iteration-best ant deposits proportionally to its
collected prize. Scores are negated prizes so lower stays better.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import EvaluationResult
from .tsp import dist_matrix

PROBLEM_NAME = "op_aco"
FUNCTION_BASE = "heuristics"
FUNCTION_SIGNATURE = (
    "def heuristics_v2(node_attr: np.ndarray, edge_attr: np.ndarray, "
    "node_constraint: float) -> np.ndarray:"
)
PROBLEM_DESCRIPTION = (
    "Solving a black-box graph combinatorial optimization problem via "
    "stochastic solution sampling following \"heuristics\"."
)
FUNCTION_DESCRIPTION = (
    "The 'heuristics' function takes as input a vector of node attributes "
    "(shape: n), a matrix of edge attributes (shape: n by n), and a "
    "constraint imposed on the sum of edge attributes. A special node is "
    "indexed by 0. 'heuristics' returns prior indicators of how promising it "
    "is to include each edge in a solution. The return is of the same shape "
    "as the input matrix of edge attributes."
)
SEED_SOURCE = """import numpy as np

def heuristics_v1(node_attr: np.ndarray, edge_attr: np.ndarray, node_constraint: float) -> np.ndarray:
    return np.ones_like(edge_attr)
"""


@dataclass
class OpInstance:
    coords: np.ndarray  # node 0 is the depot
    prizes: np.ndarray
    max_len: float = 3.0
    seed: int = 0

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=float)
        self.prizes = np.asarray(self.prizes, dtype=float)
        if self.max_len <= 0:
            raise ValueError("max_len must be positive")

    @property
    def n(self) -> int:
        return self.coords.shape[0]


def gen_op(
    seed: int,
    n: int = 50,
    max_len: float = 3.0,
    prize_convention: str = "as_printed",
) -> OpInstance:
    """Uniform coordinates in the unit square, depot at index 0, prizes
    growing with distance from the depot.

    ``as_printed`` uses p = 1 + (99 * d/dmax) / 100, spanning [1, 1.99]
    with the depot at exactly 1. ``discretized`` uses the alternative
    (1 + floor(99 * d/dmax)) / 100 spanning [0.01, 1].
    """
    if n < 2:
        raise ValueError("need at least a depot and one node")
    rng = np.random.default_rng(seed)
    coords = rng.uniform(size=(n, 2))
    d0 = np.sqrt(((coords - coords[0]) ** 2).sum(axis=1))
    dmax = float(d0[1:].max())
    ratio = d0 / dmax if dmax > 0 else np.zeros_like(d0)
    if prize_convention == "as_printed":
        prizes = 1.0 + (99.0 * ratio) / 100.0
    elif prize_convention == "discretized":
        prizes = (1.0 + np.floor(99.0 * ratio)) / 100.0
    else:
        raise ValueError(f"unknown prize convention {prize_convention!r}")
    return OpInstance(coords=coords, prizes=prizes, max_len=max_len, seed=seed)


def validate_promise(promise, n: int) -> np.ndarray:
    mat = np.asarray(promise, dtype=float)
    if mat.shape != (n, n):
        raise ValueError(f"promise matrix shape {mat.shape}, expected {(n, n)}")
    if not np.all(np.isfinite(mat)):
        raise ValueError("promise matrix has non-finite entries")
    if (mat < 0).any():
        raise ValueError("promise matrix has negative entries")
    return mat


def tour_total_length(tour, dist: np.ndarray) -> float:
    """Length of depot -> tour -> depot."""
    length = 0.0
    for a, b in zip(tour, tour[1:]):
        length += float(dist[a, b])
    length += float(dist[tour[-1], 0]) if len(tour) > 1 else 0.0
    return length


def _construct_tour(rng, tau, eta, dist, max_len):
    current = 0
    remaining = max_len
    visited = [0]
    mask = np.zeros(dist.shape[0], dtype=bool)
    mask[0] = True
    while True:
        reach = dist[current] + dist[:, 0]
        feasible = np.flatnonzero(~mask & (reach <= remaining))
        if feasible.size == 0:
            break
        weights = tau[current, feasible] * eta[current, feasible]
        total = float(weights.sum())
        if total > 0:
            nxt = int(rng.choice(feasible, p=weights / total))
        else:
            nxt = int(feasible[int(rng.integers(feasible.size))])
        remaining -= float(dist[current, nxt])
        visited.append(nxt)
        mask[nxt] = True
        current = nxt
    return visited


def aco_solve(
    instance: OpInstance,
    promise,
    n_ants: int = 20,
    iterations: int = 50,
    rng: np.random.Generator | None = None,
    evaporation: float = 0.9,
) -> tuple[float, list[int]]:
    """Best collected prize and the tour that earned it.

    Every sampled tour satisfies the length cap including the return to
    the depot; the depot's prize counts once. Deterministic given rng.
    """
    rng = rng or np.random.default_rng(0)
    n = instance.n
    dist = dist_matrix(instance.coords)
    eta = validate_promise(promise, n)
    tau = np.ones((n, n))
    best_prize = float(instance.prizes[0])
    best_tour = [0]
    for _ in range(iterations):
        iter_best_prize = -math.inf
        iter_best_tour = None
        for _ in range(n_ants):
            tour = _construct_tour(rng, tau, eta, dist, instance.max_len)
            prize = float(instance.prizes[tour].sum())
            if prize > iter_best_prize:
                iter_best_prize = prize
                iter_best_tour = tour
        if iter_best_prize > best_prize:
            best_prize = iter_best_prize
            best_tour = iter_best_tour
        tau *= evaporation
        deposit = iter_best_prize
        for a, b in zip(iter_best_tour, iter_best_tour[1:] + [0]):
            tau[a, b] += deposit
            tau[b, a] += deposit
    return best_prize, best_tour


def brute_force_op(instance: OpInstance) -> float:
    """Exhaustive optimum over all feasible ordered node subsets."""
    n = instance.n
    dist = dist_matrix(instance.coords)
    prizes = instance.prizes
    best = float(prizes[0])

    def extend(current, used_len, prize, visited):
        nonlocal best
        best = max(best, prize)
        for j in range(1, n):
            if visited & (1 << j):
                continue
            step = dist[current, j]
            if used_len + step + dist[j, 0] <= instance.max_len:
                extend(j, used_len + step, prize + float(prizes[j]), visited | (1 << j))

    extend(0, 0.0, float(prizes[0]), 1)
    return best


def evaluate_with_callable(
    promise_fn,
    instances: list[OpInstance],
    n_ants: int = 20,
    iterations: int = 50,
    seed: int = 0,
) -> EvaluationResult:
    """Negated best prize per instance, averaged."""
    per = []
    for i, inst in enumerate(instances):
        eta = promise_fn(inst.prizes.copy(), dist_matrix(inst.coords), inst.max_len)
        rng = np.random.default_rng(np.random.SeedSequence([seed, inst.seed, i]))
        prize, _ = aco_solve(inst, eta, n_ants=n_ants, iterations=iterations, rng=rng)
        per.append(-prize)
    return EvaluationResult(objective=float(np.mean(per)), per_instance=per)
