import numpy as np
import pytest

from hevolve.errors import OracleTooLargeError
from hevolve.problems.tsp import (
    TspInstance,
    dist_matrix,
    evaluate_with_callable,
    exact_tsp,
    gen_tsp,
    gls_solve,
    identity_update,
    nearest_neighbor_tour,
    reference_length,
    tour_length,
    two_opt,
)


def seed_update(edge_distance, local_opt_tour, edge_n_used):
    updated = np.copy(edge_distance)
    num_nodes = edge_distance.shape[0]
    for i in range(num_nodes - 1):
        a, b = local_opt_tour[i], local_opt_tour[i + 1]
        updated[a, b] *= 1 + edge_n_used[a, b]
    a, b = local_opt_tour[-1], local_opt_tour[0]
    updated[a, b] *= 1 + edge_n_used[a, b]
    return updated


def test_gen_deterministic_and_in_unit_square():
    a = gen_tsp(5, n=30)
    b = gen_tsp(5, n=30)
    assert np.array_equal(a.coords, b.coords)
    assert a.coords.min() >= 0.0 and a.coords.max() <= 1.0


def test_exact_unit_square_corners():
    inst = TspInstance(coords=np.array([[0, 0], [0, 1], [1, 1], [1, 0]], dtype=float))
    assert exact_tsp(inst) == pytest.approx(4.0, abs=1e-12)


def test_exact_three_nodes_any_order():
    rng = np.random.default_rng(0)
    coords = rng.uniform(size=(3, 2))
    inst = TspInstance(coords=coords)
    dist = dist_matrix(coords)
    cycle = dist[0, 1] + dist[1, 2] + dist[2, 0]
    assert exact_tsp(inst) == pytest.approx(float(cycle), abs=1e-12)


def test_exact_rejects_large_instances():
    with pytest.raises(OracleTooLargeError):
        exact_tsp(gen_tsp(0, n=12))


def test_exact_matches_tour_enumeration_via_2opt_lower_bound():
    # 2-opt can never beat the optimum
    for seed in range(5):
        inst = gen_tsp(seed, n=7)
        dist = dist_matrix(inst.coords)
        opt = exact_tsp(inst)
        local = tour_length(two_opt(nearest_neighbor_tour(dist), dist), dist)
        assert local >= opt - 1e-9


def test_tour_length_recomputation_consistency():
    inst = gen_tsp(3, n=9)
    dist = dist_matrix(inst.coords)
    tour = two_opt(nearest_neighbor_tour(dist), dist)
    assert sorted(tour) == list(range(9))  # permutation: every node once
    manual = sum(
        float(dist[tour[i], tour[(i + 1) % len(tour)]]) for i in range(len(tour))
    )
    assert tour_length(tour, dist) == pytest.approx(manual, abs=1e-9)


def test_gls_identity_never_beats_exact():
    for seed in range(5):
        inst = gen_tsp(seed, n=8)
        found = gls_solve(inst, identity_update, iters=30)
        assert found >= exact_tsp(inst) - 1e-9


def test_gls_single_iteration_is_pure_2opt():
    inst = gen_tsp(1, n=8)
    calls = []

    def counting(edge_distance, local_opt_tour, edge_n_used):
        calls.append(1)
        return edge_distance

    found = gls_solve(inst, counting, iters=1)
    dist = dist_matrix(inst.coords)
    pure = tour_length(two_opt(nearest_neighbor_tour(dist), dist), dist)
    assert found == pytest.approx(pure, abs=1e-12)
    assert calls == []  # never applied after the final improvement


def test_gls_seed_heuristic_gap_on_small_instances():
    gaps = []
    for seed in range(20):
        inst = gen_tsp(seed, n=8)
        found = gls_solve(inst, seed_update, iters=200)
        opt = exact_tsp(inst)
        gap = (found - opt) / opt
        assert gap >= -1e-9
        gaps.append(gap)
    within = sum(1 for g in gaps if g <= 0.05)
    assert within >= 18  # >= 90% of 20 seeded instances
    assert float(np.mean(gaps)) <= 0.05


def test_gls_rejects_bad_guide():
    inst = gen_tsp(2, n=6)
    with pytest.raises(ValueError):
        gls_solve(inst, lambda d, t, u: d[:3, :3], iters=2)
    with pytest.raises(ValueError):
        gls_solve(inst, lambda d, t, u: d * np.nan, iters=2)


def test_eval_gap_zero_when_found_equals_oracle():
    instances = [gen_tsp(s, n=6) for s in range(3)]
    oracles = [exact_tsp(i) for i in instances]
    result = evaluate_with_callable(
        seed_update, instances, oracles, iters=50, perturbation_moves=1
    )
    assert result.valid
    assert all(g >= -1e-9 for g in result.per_instance)
    assert result.objective == pytest.approx(float(np.mean(result.per_instance)))


def test_gap_formula():
    inst = gen_tsp(9, n=6)
    opt = exact_tsp(inst)
    found = opt * 1.1
    assert (found - opt) / opt == pytest.approx(0.1)


def test_reference_length_upper_bounds_exact():
    for seed in range(3):
        inst = gen_tsp(seed, n=9)
        assert reference_length(inst) >= exact_tsp(inst) - 1e-9
