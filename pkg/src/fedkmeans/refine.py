"""Client-side refinement of Lloyd solutions.

A suboptimal Lloyd fixed point pairs a stretched cluster that straddles
several true clusters (one-fit-many) with two or more centroids crowding a
single true cluster (many-fit-one).  The refinement loop detects the most
stretched cluster by the standard deviation of its point-to-centroid
distances, detects the closest centroid pair, and compares the stretched
cluster's squared-error mass against the squared error of the merged pair
around the merged mean.  If the stretched cluster costs at least as much,
its centroid is spurious and is removed; otherwise the solution is accepted
as-is.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kmeans import ClusterSolution, as_points


@dataclass(frozen=True)
class RemovalRecord:
    """Audit entry for one eliminated centroid."""

    centroid: np.ndarray
    cluster_sse: float  # squared-error mass of the removed cluster
    merged_sse: float  # squared-error mass of the merged closest pair


@dataclass(frozen=True)
class RefinedSolution:
    """Surviving centroids with their point-index clusters and an audit
    trail of removals."""

    centroids: np.ndarray
    clusters: list[np.ndarray]
    removed: list[RemovalRecord] = field(default_factory=list)

    def __post_init__(self):
        object.__setattr__(self, "centroids", np.asarray(self.centroids, dtype=float))
        if self.centroids.shape[0] != len(self.clusters):
            raise ValueError("one cluster index list per centroid required")

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @classmethod
    def from_solution(cls, solution: ClusterSolution) -> "RefinedSolution":
        return cls(solution.centroids.copy(), solution.clusters(), [])


def _distance_stds(points: np.ndarray, centroids: np.ndarray,
                   clusters: list[np.ndarray]) -> np.ndarray:
    """Population std of point-to-centroid distances per cluster; empty
    clusters get -inf so they are never selected."""
    stds = np.full(len(clusters), -np.inf)
    for j, idx in enumerate(clusters):
        if idx.size > 0:
            dists = np.linalg.norm(points[idx] - centroids[j], axis=1)
            stds[j] = float(dists.std())
    return stds


def _stretched_cluster(points, centroids, clusters, exclude=()) -> int | None:
    stds = _distance_stds(points, centroids, clusters)
    for j in exclude:
        stds[j] = -np.inf
    if np.all(np.isneginf(stds)):
        return None
    return int(np.argmax(stds))


def _closest_pair(centroids: np.ndarray) -> tuple[int, int]:
    k = centroids.shape[0]
    diff = centroids[:, None, :] - centroids[None, :, :]
    dists = np.sqrt((diff**2).sum(axis=2))
    dists[np.tril_indices(k)] = np.inf
    p, q = np.unravel_index(np.argmin(dists), dists.shape)
    return int(p), int(q)


def _sse(points: np.ndarray, center: np.ndarray) -> float:
    return float(((points - center) ** 2).sum())


def detect_one_fit_many(solution: ClusterSolution, data, exclude=()) -> int:
    """Index of the non-empty cluster whose point-to-centroid distances
    have the largest standard deviation (ties break to the lowest index)."""
    points = as_points(data)
    j = _stretched_cluster(points, solution.centroids, solution.clusters(), exclude)
    if j is None:
        raise ValueError("all clusters are empty")
    return j


def detect_many_fit_one(solution: ClusterSolution) -> tuple[int, int]:
    """Centroid index pair with the smallest pairwise distance (ties break
    to the lexicographically smallest pair)."""
    if solution.k < 2:
        raise ValueError("need at least two centroids")
    return _closest_pair(solution.centroids)


def refine(solution: ClusterSolution, data) -> RefinedSolution:
    """Iteratively eliminate spurious stretched-cluster centroids.

    Detection restarts from scratch after every removal.  The stretched
    candidate is always chosen outside the closest pair, so the loop needs
    at least three centroids to act; with fewer, or once the comparison
    favors keeping, the current solution is returned.
    """
    points = as_points(data)
    centroids = solution.centroids.copy()
    clusters = solution.clusters()
    removed: list[RemovalRecord] = []

    while centroids.shape[0] >= 3:
        p, q = _closest_pair(centroids)
        i = _stretched_cluster(points, centroids, clusters, exclude=(p, q))
        if i is None:
            break
        cluster_sse = _sse(points[clusters[i]], centroids[i])
        merged_idx = np.concatenate([clusters[p], clusters[q]])
        if merged_idx.size > 0:
            merged_center = points[merged_idx].mean(axis=0)
        else:
            merged_center = (centroids[p] + centroids[q]) / 2.0
        merged_sse = _sse(points[merged_idx], merged_center)
        if cluster_sse >= merged_sse:
            removed.append(RemovalRecord(centroids[i].copy(), cluster_sse, merged_sse))
            centroids = np.delete(centroids, i, axis=0)
            del clusters[i]
        else:
            break
    return RefinedSolution(centroids, clusters, removed)
