"""Tour of the three benchmarks at desk scale: generate instances, run
the trivial seed heuristics in-process, and compare against the exact
oracles where enumeration is feasible."""

import numpy as np

from hevolve.problems import bpo, op, tsp

print("=== online bin packing ===")
inst = bpo.gen_bpo(seed=0, n_items=500)
print(f"items: {inst.items.size}, sizes {inst.items.min()}..{inst.items.max()}, "
      f"capacity {inst.capacity}")

def seed_scorer(item, caps):
    return -np.log(item / caps)

bins = bpo.pack_online(inst.items, inst.capacity, seed_scorer)
lb = bpo.mt_lower_bound(inst.items, inst.capacity)
print(f"seed packing: {len(bins)} bins vs lower bound {lb} "
      f"({len(bins) / lb:.3%} of bound)")
print(f"per-instance score -(lb/n) = {-(lb / len(bins)):.4f}")

print("\n=== TSP with guided local search ===")
inst = tsp.gen_tsp(seed=3, n=8)
optimum = tsp.exact_tsp(inst)

def seed_update(edge_distance, local_opt_tour, edge_n_used):
    updated = np.copy(edge_distance)
    n = edge_distance.shape[0]
    for i in range(n - 1):
        a, b = local_opt_tour[i], local_opt_tour[i + 1]
        updated[a, b] *= 1 + edge_n_used[a, b]
    a, b = local_opt_tour[-1], local_opt_tour[0]
    updated[a, b] *= 1 + edge_n_used[a, b]
    return updated

found = tsp.gls_solve(inst, seed_update, iters=100)
print(f"8 nodes: exact optimum {optimum:.4f}, GLS with seed guide {found:.4f}, "
      f"gap {(found - optimum) / optimum:.3%}")

print("\n=== orienteering with ant colony optimization ===")
inst = op.gen_op(seed=5, n=6)
print(f"prizes: depot {inst.prizes[0]:.2f}, others "
      f"{inst.prizes[1:].min():.2f}..{inst.prizes[1:].max():.2f}, "
      f"length cap {inst.max_len}")
optimum = op.brute_force_op(inst)
eta = np.ones((inst.n, inst.n))  # the seed promise matrix
prize, tour = op.aco_solve(inst, eta, n_ants=20, iterations=50,
                           rng=np.random.default_rng(0))
dist = tsp.dist_matrix(inst.coords)
print(f"exhaustive optimum {optimum:.4f}; ACO best {prize:.4f} "
      f"({prize / optimum:.1%}) via tour {tour}, "
      f"length {op.tour_total_length(tour, dist):.4f}")
