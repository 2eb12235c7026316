"""Population-diversity metrics over embedded heuristic archives.

Two observational indices, both natural-log Shannon entropies and both
deliberately unnormalized (no division by log-richness, no [0,1] scaling):

* cluster-entropy index: individuals are grouped by a cosine-similarity
  threshold and the entropy of the cluster-size distribution is reported.
  Bounded above by ln(number of clusters).
* spanning-tree index: entropy of the normalized edge-length distribution
  of the exact Euclidean minimum spanning tree over the whole archive.
  Bounded above by ln(archive size - 1).

Both are computed over the cumulative archive at a timestep, never over
the working population alone.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embedding import CodeEmbedding, cosine_similarity
from .errors import EmptyArchiveError, InsufficientArchiveError


@dataclass
class ClusterPartition:
    """Disjoint clusters of embedding ids covering the whole input."""

    clusters: list[list[str]]
    alpha: float

    @property
    def total(self) -> int:
        return sum(len(c) for c in self.clusters)

    def sizes(self) -> list[int]:
        return [len(c) for c in self.clusters]


@dataclass
class MstSummary:
    """Exact Euclidean MST: (id_a, id_b, length) per edge, ids sorted
    within each pair; exactly n-1 edges for n embedded points."""

    edges: list[tuple[str, str, float]]

    @property
    def total_length(self) -> float:
        return float(sum(e[2] for e in self.edges))

    def lengths(self) -> np.ndarray:
        return np.array([e[2] for e in self.edges], dtype=float)


@dataclass
class DiversityReport:
    timestep: int
    swdi: float
    cdi: float
    partition: ClusterPartition
    mst: MstSummary | None
    archive_size: int = 0


def cluster_archive(embeddings: list[CodeEmbedding], alpha: float) -> ClusterPartition:
    """First-fit threshold clustering in archive insertion order.

    Each embedding joins the first existing cluster (in creation order)
    whose every member has cosine similarity >= alpha with it; otherwise
    it founds a new cluster. Deterministic given input order.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if not embeddings:
        raise EmptyArchiveError("cannot cluster an empty archive")
    clusters: list[list[int]] = []
    for i, emb in enumerate(embeddings):
        placed = False
        for members in clusters:
            if all(cosine_similarity(emb, embeddings[k]) >= alpha for k in members):
                members.append(i)
                placed = True
                break
        if not placed:
            clusters.append([i])
    ids = [
        [embeddings[k].source_id or str(k) for k in members] for members in clusters
    ]
    return ClusterPartition(clusters=ids, alpha=alpha)


def _entropy(weights: np.ndarray) -> float:
    """Shannon entropy (natural log) of weights normalized to probabilities.
    Zero weights contribute zero (the p*log p limit)."""
    total = float(weights.sum())
    if total <= 0.0:
        return 0.0
    p = weights[weights > 0] / total
    return float(-(p * np.log(p)).sum())


def swdi(partition: ClusterPartition) -> float:
    """Entropy of the distribution of individuals across clusters."""
    return _entropy(np.array(partition.sizes(), dtype=float))


def minimum_spanning_tree(embeddings: list[CodeEmbedding]) -> MstSummary:
    """Exact MST of the complete Euclidean graph over the embeddings.

    Kruskal over edges sorted by (length, id_a, id_b) so equal-length ties
    break toward lexically smaller id pairs.
    """
    n = len(embeddings)
    if n < 2:
        raise InsufficientArchiveError("spanning tree needs at least 2 points")
    ids = [e.source_id or str(i) for i, e in enumerate(embeddings)]
    points = np.stack([e.vector for e in embeddings])
    if points.ndim != 2:
        raise ValueError("embeddings must share one dimension")

    edges = []
    for i in range(n):
        diffs = points[i + 1 :] - points[i]
        dists = np.sqrt((diffs * diffs).sum(axis=1))
        for off, d in enumerate(dists):
            j = i + 1 + off
            a, b = sorted((ids[i], ids[j]))
            edges.append((float(d), a, b, i, j))
    edges.sort(key=lambda e: (e[0], e[1], e[2]))

    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen: list[tuple[str, str, float]] = []
    for d, a, b, i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            chosen.append((a, b, d))
            if len(chosen) == n - 1:
                break
    return MstSummary(edges=chosen)


def cdi(embeddings: list[CodeEmbedding]) -> float:
    """Entropy of the MST edge-length distribution.

    All-identical points (total length zero) degenerate to 0.
    """
    mst = minimum_spanning_tree(embeddings)
    return cdi_from_mst(mst)


def cdi_from_mst(mst: MstSummary) -> float:
    return _entropy(mst.lengths())


def compute_report(
    embeddings: list[CodeEmbedding], alpha: float, timestep: int
) -> DiversityReport:
    """Cluster + spanning-tree metrics for one archive snapshot.

    A single-entry archive has no spanning tree; its tree index is
    reported as 0 with no MST attached.
    """
    partition = cluster_archive(embeddings, alpha)
    if len(embeddings) >= 2:
        mst = minimum_spanning_tree(embeddings)
        tree_index = cdi_from_mst(mst)
    else:
        mst = None
        tree_index = 0.0
    return DiversityReport(
        timestep=timestep,
        swdi=swdi(partition),
        cdi=tree_index,
        partition=partition,
        mst=mst,
        archive_size=len(embeddings),
    )


DIVERSITY_CSV_COLUMNS = (
    "timestep",
    "swdi",
    "cdi",
    "n_clusters",
    "archive_size",
    "mst_total_length",
)


def report_row(report: DiversityReport) -> dict:
    return {
        "timestep": report.timestep,
        "swdi": repr(report.swdi),
        "cdi": repr(report.cdi),
        "n_clusters": len(report.partition.clusters),
        "archive_size": report.archive_size,
        "mst_total_length": repr(report.mst.total_length if report.mst else 0.0),
    }


def write_diversity_csv(reports: list[DiversityReport], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=DIVERSITY_CSV_COLUMNS)
        writer.writeheader()
        for rep in reports:
            writer.writerow(report_row(rep))


def read_diversity_csv(path: str | Path) -> list[dict]:
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        return [dict(row) for row in csv.DictReader(fh)]


def snapshot_report(entries, alpha: float, timestep: int, embedder,
                    include_invalid: bool = True) -> DiversityReport:
    """Report over archived individuals: normalize, embed, cluster, span.

    Invalid individuals participate unless filtered out; an empty or
    single-entry snapshot degenerates to zeros rather than erroring.
    """
    from .normalize import normalize_or_degrade

    if not include_invalid:
        entries = [e for e in entries if e.valid]
    embeddings = [
        embedder.embed(normalize_or_degrade(e.source, e.id)) for e in entries
    ]
    if not embeddings:
        return DiversityReport(
            timestep=timestep,
            swdi=0.0,
            cdi=0.0,
            partition=ClusterPartition(clusters=[], alpha=alpha),
            mst=None,
        )
    return compute_report(embeddings, alpha, timestep)


def trajectory_reports(archive, alpha: float, embedder,
                       include_invalid: bool = True,
                       cumulative: bool = True) -> list[DiversityReport]:
    """Recompute the whole diversity trajectory from an archive alone.

    ``cumulative=False`` scores each generation's cohort on its own
    instead of everything produced so far.
    """
    reports = []
    for t in archive.timesteps():
        if cumulative:
            entries = archive.snapshot_at(t)
        else:
            entries = [e for e in archive.entries if e.generation == t]
        reports.append(
            snapshot_report(entries, alpha, t, embedder, include_invalid)
        )
    return reports
