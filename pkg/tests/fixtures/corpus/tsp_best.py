import numpy as np

def update_edge_distance_v2(edge_distance: np.ndarray, local_opt_tour: np.ndarray, edge_n_used: np.ndarray,
                             penalty_factor: float = 0.6713404008357979, bonus_factor: float = 1.343302294236627, decay_factor: float = 0.3821795974433295,
                             scaling_factor: float = 1.116349420562543, min_distance: float = 7.965736386169868e-05,
                             penalty_threshold: float = 29.850922399224466, boost_threshold: float = 70.53785604399908) -> np.ndarray:
    """
    Update edge distances using adaptive penalties and bonuses, considering edge usage dynamics
    while ensuring nuanced performance in line with real-time data patterns.
    """
    num_nodes = edge_distance.shape[0]
    updated_edge_distance = np.copy(edge_distance)

    # Calculate average usage for dynamic adjustments
    avg_usage = np.mean(edge_n_used)

    for i in range(num_nodes):
        current_node = local_opt_tour[i]
        next_node = local_opt_tour[(i + 1) % num_nodes]
        usage_count = edge_n_used[current_node, next_node]

        # Adaptive penalty for overused edges
        if usage_count > penalty_threshold:
            # Penalty increases exponentially with usage
            penalty = penalty_factor * (usage_count - penalty_threshold) ** 2
            updated_edge_distance[current_node, next_node] += penalty
            updated_edge_distance[next_node, current_node] += penalty  # Ensure symmetry

        elif usage_count < boost_threshold:
            # Apply a bonus to underused edges
            boost = bonus_factor * (1 + (boost_threshold - usage_count) * 0.1)
            updated_edge_distance[current_node, next_node] *= boost
            updated_edge_distance[next_node, current_node] *= boost  # Ensure symmetry

        # Dynamic scaling based on average usage
        if usage_count > avg_usage:
            adjustment_factor = scaling_factor / (1 + decay_factor ** (usage_count - avg_usage))
        else:
            adjustment_factor = scaling_factor * (1 + decay_factor ** (avg_usage - usage_count))

        # Update the distance with adjustment and ensure non-negative distances
        updated_edge_distance[current_node, next_node] = max(min_distance,
            updated_edge_distance[current_node, next_node] * adjustment_factor)

    return updated_edge_distance
