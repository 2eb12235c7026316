"""Traveling salesman instances solved by guided local search.

The candidate heuristic steers the perturbation phase: after each 2-opt
local optimum it maps (edge distances, the local-optimum tour, edge usage
counts) to an updated edge-value matrix, and the tour edges with the
highest updated values get penalized in the working distance matrix. The
solver reports the best true-distance tour found. Exact brute force is
available up to 11 nodes as the gap oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import EvaluationResult
from ..errors import OracleTooLargeError

PROBLEM_NAME = "tsp_gls"
FUNCTION_BASE = "update_edge_distance"
FUNCTION_SIGNATURE = (
    "def update_edge_distance_v2(edge_distance: np.ndarray, "
    "local_opt_tour: np.ndarray, edge_n_used: np.ndarray) -> np.ndarray:"
)
PROBLEM_DESCRIPTION = (
    "Solving Traveling Salesman Problem (TSP) via guided local search. TSP "
    "requires finding the shortest path that visits all given nodes and "
    "returns to the starting node."
)
FUNCTION_DESCRIPTION = (
    "The 'update_edge_distance' function takes as input a matrix of edge "
    "distances, a locally optimized tour, and a matrix indicating the number "
    "of times each edge has been used. It returns an updated matrix of edge "
    "distances that incorporates the effects of the local optimization and "
    "edge usage. The returned matrix has the same shape as the input "
    "'edge_distance' matrix, with the distances adjusted based on the "
    "provided tour and usage data."
)
SEED_SOURCE = '''import numpy as np

def update_edge_distance(edge_distance: np.ndarray, local_opt_tour: np.ndarray, edge_n_used: np.ndarray) -> np.ndarray:
    """
    Args:
        edge_distance (np.ndarray): Original edge distance matrix.
        local_opt_tour (np.ndarray): Local optimal solution path.
        edge_n_used (np.ndarray): Matrix representing the number of times each edge is used.
    Return:
        updated_edge_distance: updated score of each edge distance matrix.
    """

    num_nodes = edge_distance.shape[0]
    updated_edge_distance = np.copy(edge_distance)

    for i in range(num_nodes - 1):
        current_node = local_opt_tour[i]
        next_node = local_opt_tour[i + 1]
        updated_edge_distance[current_node, next_node] *= (1 + edge_n_used[current_node, next_node])

    updated_edge_distance[local_opt_tour[-1], local_opt_tour[0]] *= (1 + edge_n_used[local_opt_tour[-1], local_opt_tour[0]])
    return updated_edge_distance
'''


@dataclass
class TspInstance:
    coords: np.ndarray  # n points in the unit square
    seed: int = 0

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=float)
        if self.coords.ndim != 2 or self.coords.shape[1] != 2:
            raise ValueError("coords must be n x 2")

    @property
    def n(self) -> int:
        return self.coords.shape[0]


def gen_tsp(seed: int, n: int = 100) -> TspInstance:
    rng = np.random.default_rng(seed)
    return TspInstance(coords=rng.uniform(size=(n, 2)), seed=seed)


def dist_matrix(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def tour_length(tour, dist: np.ndarray) -> float:
    t = np.asarray(tour)
    return float(dist[t, np.roll(t, -1)].sum())


def nearest_neighbor_tour(dist: np.ndarray, start: int = 0) -> list[int]:
    n = dist.shape[0]
    unvisited = set(range(n))
    unvisited.discard(start)
    tour = [start]
    while unvisited:
        here = tour[-1]
        nxt = min(unvisited, key=lambda j: (dist[here, j], j))
        tour.append(nxt)
        unvisited.discard(nxt)
    return tour


def two_opt(tour, dist: np.ndarray) -> list[int]:
    """Best-improvement 2-opt to a local optimum, deterministic."""
    tour = list(tour)
    n = len(tour)
    if n < 4:
        return tour
    improved = True
    while improved:
        improved = False
        t = np.array(tour)
        best_delta = -1e-12
        best_move = None
        for i in range(n - 2):
            j_hi = n - 1 if i > 0 else n - 2  # skip the full-cycle no-op
            js = np.arange(i + 1, j_hi + 1)
            a, b = t[i], t[i + 1]
            c = t[js]
            d = t[(js + 1) % n]
            deltas = dist[a, c] + dist[b, d] - dist[a, b] - dist[c, d]
            k = int(np.argmin(deltas))
            if deltas[k] < best_delta:
                best_delta = float(deltas[k])
                best_move = (i, int(js[k]))
        if best_move is not None:
            i, j = best_move
            tour[i + 1 : j + 1] = reversed(tour[i + 1 : j + 1])
            improved = True
    return tour


def exact_tsp(instance: TspInstance) -> float:
    """Brute-force optimal cycle length; desk scale only (n <= 11)."""
    n = instance.n
    if n > 11:
        raise OracleTooLargeError(f"exact enumeration capped at 11 nodes, got {n}")
    dist = dist_matrix(instance.coords)
    if n <= 2:
        return 0.0 if n < 2 else float(2.0 * dist[0, 1])
    best = math.inf
    for perm in itertools.permutations(range(1, n)):
        if perm[0] > perm[-1]:
            continue  # each cycle counted once per direction
        length = dist[0, perm[0]] + dist[perm[-1], 0]
        for a, b in zip(perm, perm[1:]):
            length += dist[a, b]
        best = min(best, float(length))
    return best


def _tour_edges(tour) -> list[tuple[int, int]]:
    return [(tour[i], tour[(i + 1) % len(tour)]) for i in range(len(tour))]


def gls_solve(
    instance: TspInstance,
    update_fn,
    iters: int,
    perturbation_moves: int = 1,
    penalty_scale: float = 0.1,
) -> float:
    """Guided local search: nearest-neighbor start, then ``iters`` rounds of
    2-opt on a working matrix that accumulates penalties on the tour edges
    the heuristic values highest. Returns the best true tour length seen.

    The heuristic never runs after the final improvement round.
    """
    if iters < 1:
        raise ValueError("iters must be at least 1")
    dist = dist_matrix(instance.coords)
    n = instance.n
    off_diag = ~np.eye(n, dtype=bool)
    mean_edge = float(dist[off_diag].mean()) if n > 1 else 0.0
    working = dist.copy()
    usage = np.zeros_like(dist)
    tour = nearest_neighbor_tour(dist)
    best_length = math.inf
    for it in range(iters):
        tour = two_opt(tour, working)
        for u, v in _tour_edges(tour):
            usage[u, v] += 1
            usage[v, u] += 1
        best_length = min(best_length, tour_length(tour, dist))
        if it == iters - 1:
            break
        guide = np.asarray(
            update_fn(dist.copy(), np.array(tour), usage.copy()), dtype=float
        )
        if guide.shape != dist.shape:
            raise ValueError(f"guide shape {guide.shape}, expected {dist.shape}")
        if not np.all(np.isfinite(guide)):
            raise ValueError("guide matrix has non-finite entries")
        ranked = sorted(
            _tour_edges(tour), key=lambda e: (-float(guide[e[0], e[1]]), e)
        )
        for u, v in ranked[:perturbation_moves]:
            working[u, v] += penalty_scale * mean_edge
            working[v, u] += penalty_scale * mean_edge
    return best_length


def identity_update(edge_distance, local_opt_tour, edge_n_used):
    """Leaves the matrix unchanged: baseline heuristic for comparisons."""
    return edge_distance


def reference_length(instance: TspInstance, restarts: int = 3) -> float:
    """Multi-start nearest-neighbor + 2-opt reference tour length.

    Not optimal; used only where exact enumeration is out of reach.
    """
    dist = dist_matrix(instance.coords)
    n = instance.n
    starts = [int(s) for s in np.linspace(0, n - 1, num=min(restarts, n), dtype=int)]
    best = math.inf
    for s in starts:
        tour = two_opt(nearest_neighbor_tour(dist, start=s), dist)
        best = min(best, tour_length(tour, dist))
    return best


def evaluate_with_callable(
    update_fn,
    instances: list[TspInstance],
    oracle_lengths: list[float],
    iters: int = 1000,
    perturbation_moves: int = 1,
) -> EvaluationResult:
    """Mean relative gap to the per-instance oracle lengths."""
    gaps = []
    for inst, opt in zip(instances, oracle_lengths):
        found = gls_solve(inst, update_fn, iters, perturbation_moves)
        gaps.append((found - opt) / opt)
    return EvaluationResult(objective=float(np.mean(gaps)), per_instance=gaps)
