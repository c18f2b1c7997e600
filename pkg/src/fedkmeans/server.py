"""Server-side grouping and averaging of pooled centroid-radius pairs.

The server repeatedly takes the not-yet-grouped pair with the largest
radius and collects every remaining centroid inside that radius into one
group.  The k most populated groups survive (ties by summed cluster size,
then by formation order) and each contributes the mean of its member
centroids to the final answer.  Smaller-radius crowded centroids therefore
join the group of a confident large-radius centroid instead of forming
their own.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .radius import CentroidRadius


@dataclass(frozen=True)
class AggregationResult:
    """Final centroids with their contributing groups.

    ``final_centroids`` may hold fewer than the requested ``requested_k``
    rows when the pooled pairs form fewer groups; that is a flagged
    success, not an error.  ``discarded`` holds pairs from groups dropped
    by the top-k selection.
    """

    final_centroids: np.ndarray
    groups: list[list[CentroidRadius]]
    discarded: list[CentroidRadius]
    requested_k: int

    @property
    def underfull(self) -> bool:
        return self.final_centroids.shape[0] < self.requested_k

    @property
    def k(self) -> int:
        return self.final_centroids.shape[0]


def aggregate(pairs: list[CentroidRadius], k: int,
              weight_by_cluster_size: bool = False) -> AggregationResult:
    """Greedy largest-radius-first grouping, then top-k group means.

    Selection order is keyed on radius with deterministic (client, arrival
    index) tie-breaking.  Group membership is judged against the selected
    pair's radius only.  Means are unweighted unless
    ``weight_by_cluster_size`` is set.
    """
    if not pairs:
        raise ValueError("no centroid-radius pairs to aggregate")
    if k < 1:
        raise ValueError("k must be >= 1")
    centroids = np.vstack([p.centroid for p in pairs])
    # deterministic selection: radius desc, then client asc, then arrival order
    order = sorted(range(len(pairs)), key=lambda i: (-pairs[i].radius, pairs[i].client, i))
    remaining = np.ones(len(pairs), dtype=bool)
    groups: list[list[int]] = []
    for i in order:
        if not remaining[i]:
            continue
        dists = np.linalg.norm(centroids[remaining] - centroids[i], axis=1)
        member_idx = np.flatnonzero(remaining)[dists <= pairs[i].radius]
        groups.append(member_idx.tolist())
        remaining[member_idx] = False

    def rank(entry):
        formed_at, members = entry
        size_sum = sum(pairs[m].cluster_size for m in members)
        return (-len(members), -size_sum, formed_at)

    ranked = sorted(enumerate(groups), key=rank)
    top = ranked[:k]
    dropped = ranked[k:]

    final = []
    kept_groups = []
    for _, members in top:
        member_pairs = [pairs[m] for m in members]
        pts = np.vstack([p.centroid for p in member_pairs])
        if weight_by_cluster_size:
            w = np.array([p.cluster_size for p in member_pairs], dtype=float)
            w = w if w.sum() > 0 else np.ones(len(member_pairs))
            final.append(np.average(pts, axis=0, weights=w))
        else:
            final.append(pts.mean(axis=0))
        kept_groups.append(member_pairs)
    discarded = [pairs[m] for _, members in dropped for m in members]
    return AggregationResult(np.vstack(final), kept_groups, discarded, requested_k=k)
