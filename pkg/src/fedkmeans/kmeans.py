"""Centralized clustering primitives.

Lloyd's algorithm with k-means++ or uniform initialization, the
within-cluster squared-distance objective, a brute-force exact solver for
tiny instances, and fuzzy c-means.  Everything is a pure function of its
inputs and a seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, rng_from

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITERS = 300
EXACT_MAX_POINTS = 12
_COINCIDENT = 1e-12  # fuzzy membership collapses onto centroids this close


def as_points(data) -> np.ndarray:
    """Accept a Dataset or a raw array of points."""
    if isinstance(data, Dataset):
        return data.points
    pts = np.asarray(data, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    return pts


def pairwise_sq_dists(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """N x k matrix of squared Euclidean distances."""
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def assign_points(points: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-centroid assignment (ties break to the lowest index).

    Returns (assignment, squared distance to the assigned centroid).
    """
    sq = pairwise_sq_dists(points, centroids)
    assignment = np.argmin(sq, axis=1)
    return assignment, sq[np.arange(len(points)), assignment]


def objective(data, centroids) -> float:
    """Total squared distance from each point to its nearest centroid."""
    points = as_points(data)
    centroids = as_points(centroids)
    if centroids.shape[0] < 1:
        raise ValueError("need at least one centroid")
    if centroids.shape[1] != points.shape[1]:
        raise ValueError(
            f"dimension mismatch: points are {points.shape[1]}-D, centroids {centroids.shape[1]}-D"
        )
    return float(pairwise_sq_dists(points, centroids).min(axis=1).sum())


@dataclass(frozen=True)
class ClusterSolution:
    """Hard clustering output: centroids, per-point assignment, sizes, objective."""

    centroids: np.ndarray
    assignment: np.ndarray
    cluster_sizes: np.ndarray = field(default=None)
    objective: float = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "centroids", np.asarray(self.centroids, dtype=float))
        object.__setattr__(self, "assignment", np.asarray(self.assignment, dtype=int))
        if self.cluster_sizes is None:
            sizes = np.bincount(self.assignment, minlength=self.k)
            object.__setattr__(self, "cluster_sizes", sizes)
        else:
            object.__setattr__(self, "cluster_sizes", np.asarray(self.cluster_sizes, dtype=int))

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    def clusters(self) -> list[np.ndarray]:
        """Point indices per cluster, in centroid order."""
        return [np.flatnonzero(self.assignment == j) for j in range(self.k)]


@dataclass(frozen=True)
class FuzzySolution:
    """Soft clustering output: centroids plus an N x k membership matrix."""

    centroids: np.ndarray
    membership: np.ndarray
    fuzzifier: float

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    def membership_mass(self) -> np.ndarray:
        """Per-centroid fuzzified mass, the soft analog of cluster size."""
        return (self.membership**self.fuzzifier).sum(axis=0)


def init_kmeanspp(data, k: int, seed=None, rng: np.random.Generator | None = None,
                  weights: np.ndarray | None = None) -> np.ndarray:
    """Pick k distinct data points by squared-distance-weighted sampling."""
    points = as_points(data)
    n = points.shape[0]
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points {n}")
    if rng is None:
        rng = rng_from(seed)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    chosen = [int(rng.choice(n, p=w / w.sum()))]
    sq_best = pairwise_sq_dists(points, points[chosen])[:, 0]
    while len(chosen) < k:
        probs = sq_best * w
        probs[chosen] = 0.0
        total = probs.sum()
        if total > 0:
            idx = int(rng.choice(n, p=probs / total))
        else:
            # all remaining points coincide with chosen ones: fall back to uniform
            remaining = np.setdiff1d(np.arange(n), chosen)
            idx = int(rng.choice(remaining))
        chosen.append(idx)
        sq_best = np.minimum(sq_best, pairwise_sq_dists(points, points[[idx]])[:, 0])
    return points[chosen].copy()


def init_uniform(data, k: int, seed=None, rng: np.random.Generator | None = None) -> np.ndarray:
    """Pick k distinct data points uniformly at random."""
    points = as_points(data)
    if k > points.shape[0]:
        raise ValueError(f"k={k} exceeds the number of points {points.shape[0]}")
    if rng is None:
        rng = rng_from(seed)
    return points[rng.choice(points.shape[0], size=k, replace=False)].copy()


def lloyd(data, k: int, seed=None, init_centroids: np.ndarray | None = None,
          max_iters: int = DEFAULT_MAX_ITERS, tol: float = DEFAULT_TOL,
          init: str = "kmeans++", sample_weights: np.ndarray | None = None,
          rng: np.random.Generator | None = None,
          trace: list | None = None) -> ClusterSolution:
    """Lloyd's alternating assignment/update iteration.

    Stops when the largest centroid displacement falls below ``tol`` or
    after ``max_iters`` sweeps.  A cluster that empties is re-seeded at the
    point currently farthest from its own centroid, which never increases
    the objective.  Optional ``sample_weights`` turn the update into a
    weighted mean (used by centroid-level aggregation).  If ``trace`` is a
    list, the objective after every sweep is appended to it.
    """
    points = as_points(data)
    n, d = points.shape
    if not np.all(np.isfinite(points)):
        raise ValueError("points contain non-finite values")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points {n}")
    if rng is None:
        rng = rng_from(seed)
    if init_centroids is not None:
        centroids = np.array(init_centroids, dtype=float)
        if centroids.shape != (k, d):
            raise ValueError(f"init_centroids must have shape ({k}, {d})")
    elif init == "kmeans++":
        centroids = init_kmeanspp(points, k, rng=rng, weights=sample_weights)
    elif init == "uniform":
        centroids = init_uniform(points, k, rng=rng)
    else:
        raise ValueError(f"unknown init {init!r}")
    w = np.ones(n) if sample_weights is None else np.asarray(sample_weights, dtype=float)

    assignment, sq = assign_points(points, centroids)
    if trace is not None:
        trace.append(float((sq * w).sum()))
    for _ in range(max_iters):
        new_centroids = centroids.copy()
        for j in range(k):
            mask = assignment == j
            wj = w[mask]
            if wj.sum() > 0:
                new_centroids[j] = np.average(points[mask], axis=0, weights=wj)
        # repair empty clusters at the worst-fit points (largest current error)
        empty = [j for j in range(k) if not np.any(assignment == j)]
        if empty:
            order = np.argsort(-sq, kind="stable")
            for slot, j in enumerate(empty):
                new_centroids[j] = points[order[slot]]
        shift = np.linalg.norm(new_centroids - centroids, axis=1).max()
        centroids = new_centroids
        assignment, sq = assign_points(points, centroids)
        if trace is not None:
            trace.append(float((sq * w).sum()))
        if shift < tol:
            break
    return ClusterSolution(centroids, assignment, objective=float((sq * w).sum()))


def _set_partitions(n: int, k: int):
    """Yield assignment vectors for all partitions of n items into exactly
    k non-empty blocks (restricted-growth strings)."""
    assignment = [0] * n

    def rec(i: int, used: int):
        if i == n:
            if used == k:
                yield tuple(assignment)
            return
        # cannot reach k blocks if too few items remain
        if used + (n - i) < k:
            return
        for b in range(min(used + 1, k)):
            assignment[i] = b
            if b == used:
                yield from rec(i + 1, used + 1)
            else:
                yield from rec(i + 1, used)

    yield from rec(0, 0)


def exact_kmeans(data, k: int) -> ClusterSolution:
    """Global optimum by enumerating all partitions into k non-empty blocks.

    Guarded to tiny instances; intended as an oracle for local-vs-global
    comparisons, not for real workloads.
    """
    points = as_points(data)
    n, d = points.shape
    if n > EXACT_MAX_POINTS:
        raise ValueError(f"exact solver is limited to N <= {EXACT_MAX_POINTS}, got {n}")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points {n}")
    sq_norms = (points**2).sum(axis=1)
    best = None
    for assignment in _set_partitions(n, k):
        labels = np.array(assignment)
        total = 0.0
        for j in range(k):
            mask = labels == j
            block = points[mask]
            mean = block.mean(axis=0)
            total += sq_norms[mask].sum() - block.shape[0] * float(mean @ mean)
        if best is None or total < best[0]:
            best = (total, labels)
    total, labels = best
    centroids = np.vstack([points[labels == j].mean(axis=0) for j in range(k)])
    return ClusterSolution(centroids, labels, objective=max(total, 0.0))


def fuzzy_cmeans(data, k: int, fuzzifier: float = 2.0, seed=None,
                 init_centroids: np.ndarray | None = None,
                 max_iters: int = DEFAULT_MAX_ITERS, tol: float = DEFAULT_TOL,
                 rng: np.random.Generator | None = None) -> FuzzySolution:
    """Standard fuzzy c-means alternation.

    Memberships are inverse-squared-distance weights raised to
    1/(fuzzifier-1) and normalized per point; centroids are
    membership**fuzzifier weighted means.  A point within ~1e-12 of a
    centroid gets full membership on the nearest such centroid.
    """
    points = as_points(data)
    n, d = points.shape
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points {n}")
    if not fuzzifier > 1:
        raise ValueError("fuzzifier must be > 1")
    if rng is None:
        rng = rng_from(seed)
    if init_centroids is not None:
        centroids = np.array(init_centroids, dtype=float)
    else:
        centroids = init_kmeanspp(points, k, rng=rng)

    exponent = 1.0 / (fuzzifier - 1.0)
    membership = np.empty((n, k))
    for _ in range(max_iters):
        sq = pairwise_sq_dists(points, centroids)
        with np.errstate(divide="ignore"):
            inv = (1.0 / sq) ** exponent
        singular = (sq < _COINCIDENT**2).any(axis=1)
        if np.any(singular):
            inv[singular] = 0.0
            inv[singular, np.argmin(sq[singular], axis=1)] = 1.0
        membership = inv / inv.sum(axis=1, keepdims=True)
        powered = membership**fuzzifier
        mass = powered.sum(axis=0)
        new_centroids = np.where(
            mass[:, None] > 0, (powered.T @ points) / np.maximum(mass, 1e-300)[:, None], centroids
        )
        shift = np.linalg.norm(new_centroids - centroids, axis=1).max()
        centroids = new_centroids
        if shift < tol:
            break
    return FuzzySolution(centroids, membership, fuzzifier)
