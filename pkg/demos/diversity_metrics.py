"""Walk through the population-diversity pipeline on a handful of
heuristics: canonicalize the source, embed it, cluster by cosine
similarity, and read off the two entropy indices."""

import math

from hevolve.diversity import cdi, cluster_archive, minimum_spanning_tree, swdi
from hevolve.embedding import EmbeddingProvider
from hevolve.normalize import normalize
from hevolve.problems import bpo

# four designs: the trivial seed, a comment-only variant of it, and two
# genuinely different scoring ideas
designs = {
    "seed": bpo.SEED_SOURCE,
    "seed_commented": bpo.SEED_SOURCE.replace(
        "ratios = item / bins_remain_cap",
        "ratios = item / bins_remain_cap  # fill ratio",
    ),
    "best_fit": (
        "import numpy as np\n\n"
        "def priority_v2(item, bins_remain_cap):\n"
        "    return -(bins_remain_cap - item)\n"
    ),
    "squared_fit": (
        "import numpy as np\n\n"
        "def priority_v2(item, bins_remain_cap):\n"
        "    leftover = bins_remain_cap - item\n"
        "    return -np.power(leftover + 1.0, 2.0)\n"
    ),
}

print("=== canonicalization ===")
normalized = {}
for name, source in designs.items():
    normalized[name] = normalize(source, original_id=name)
    print(f"{name}: {len(source)} chars -> {len(normalized[name].text)} chars")

same = normalized["seed"].text == normalized["seed_commented"].text
print(f"\nseed and its commented twin normalize identically: {same}")

print("\n=== embedding and clustering ===")
provider = EmbeddingProvider()  # hash fallback: no network, no model
embeddings = [provider.embed(n) for n in normalized.values()]
partition = cluster_archive(embeddings, alpha=0.95)
for i, cluster in enumerate(partition.clusters):
    print(f"cluster {i}: {cluster}")

print("\n=== diversity indices ===")
h_clusters = swdi(partition)
print(f"cluster entropy index: {h_clusters:.4f} (max ln N = "
      f"{math.log(len(partition.clusters)):.4f})")
mst = minimum_spanning_tree(embeddings)
print(f"spanning tree: {len(mst.edges)} edges, total length {mst.total_length:.4f}")
print(f"tree entropy index: {cdi(embeddings):.4f} (max ln(n-1) = "
      f"{math.log(len(embeddings) - 1):.4f})")
print("\nNote both indices are unnormalized by design: more clusters and "
      "more individuals raise the ceiling instead of being divided away.")
