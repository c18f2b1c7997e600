"""Comparison methods: match-averaging, one-shot threshold seeding, and
multi-round fuzzy clustering with two aggregation variants."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .data import Dataset, PartitionPlan, rng_from
from .kmeans import ClusterSolution, FuzzySolution, fuzzy_cmeans, lloyd
from .pipeline import client_seed_rng, parallel_map


def _match_to_reference(reference: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Permutation aligning ``centroids`` rows to ``reference`` rows by
    exact min-cost assignment on squared distances."""
    diff = reference[:, None, :] - centroids[None, :, :]
    cost = (diff**2).sum(axis=2)
    _, cols = linear_sum_assignment(cost)
    return cols


def match_average(client_solutions: list[ClusterSolution], k: int) -> np.ndarray:
    """Align every client's centroids to client 0's and average them."""
    if not client_solutions:
        raise ValueError("no client solutions")
    for sol in client_solutions:
        if sol.k != k:
            raise ValueError(f"all clients must supply exactly k={k} centroids, got {sol.k}")
    reference = client_solutions[0].centroids
    total = reference.copy()
    for sol in client_solutions[1:]:
        perm = _match_to_reference(reference, sol.centroids)
        total += sol.centroids[perm]
    return total / len(client_solutions)


def _client_lloyd_solutions(dataset: Dataset, plan: PartitionPlan, k: int,
                            seed) -> list[ClusterSolution]:
    def run(m: int) -> ClusterSolution:
        points = dataset.points[plan.client_indices(m)]
        if points.shape[0] == 0:
            raise ValueError(f"client {m} holds no points")
        local_k = min(k, points.shape[0])
        return lloyd(points, local_k, rng=client_seed_rng(seed, m))

    return parallel_map(run, list(range(plan.n_clients)))


def run_match_average(dataset: Dataset, plan: PartitionPlan, k: int, seed) -> np.ndarray:
    solutions = _client_lloyd_solutions(dataset, plan, k, seed)
    return match_average(solutions, k)


def k_fed(dataset: Dataset, plan: PartitionPlan, k: int, k_prime: int, seed) -> np.ndarray:
    """One-shot aggregation of small per-client solutions.

    Clients cluster with ``k_prime`` centroids each.  The server seeds with
    the first client's centroids, then admits any later centroid farther
    from every current center than half the current minimum pairwise
    center distance, until k centers exist.  All received centroids are
    then assigned to their nearest center and each center is replaced by
    its group mean.
    """
    if k_prime > k:
        raise ValueError("k_prime must not exceed k")
    solutions = _client_lloyd_solutions(dataset, plan, k_prime, seed)
    received = [sol.centroids for sol in solutions]
    if sum(c.shape[0] for c in received) < k:
        raise ValueError("received fewer centroids than k; decrease k or add clients")

    centers = [c for c in received[0]]
    for client_centroids in received[1:]:
        if len(centers) >= k:
            break
        for c in client_centroids:
            if len(centers) >= k:
                break
            arr = np.vstack(centers)
            dists = np.linalg.norm(arr - c, axis=1)
            if len(centers) < 2:
                threshold = 0.0
            else:
                pair = arr[:, None, :] - arr[None, :, :]
                pd = np.sqrt((pair**2).sum(axis=2))
                pd[np.tril_indices(len(centers))] = np.inf
                threshold = pd.min() / 2.0
            if dists.min() > threshold:
                centers.append(c)
    centers = np.vstack(centers)
    all_centroids = np.vstack(received)
    nearest = np.argmin(
        ((all_centroids[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2), axis=1
    )
    out = centers.copy()
    for j in range(centers.shape[0]):
        members = all_centroids[nearest == j]
        if members.shape[0] > 0:
            out[j] = members.mean(axis=0)
    return out


def _aggregate_v1(reference: np.ndarray, solutions: list[FuzzySolution], k: int) -> np.ndarray:
    """Mass-weighted average of per-client centroids aligned to a reference."""
    num = np.zeros((k, reference.shape[1]))
    den = np.zeros(k)
    for sol in solutions:
        perm = _match_to_reference(reference, sol.centroids)
        mass = sol.membership_mass()
        num += sol.centroids[perm] * mass[perm, None]
        den += mass[perm]
    den[den == 0] = 1.0
    return num / den[:, None]


def _aggregate_v2(solutions: list[FuzzySolution], k: int, rng) -> np.ndarray:
    """Weighted Lloyd over the pooled client centroids."""
    pooled = np.vstack([sol.centroids for sol in solutions])
    weights = np.concatenate([sol.membership_mass() for sol in solutions])
    if np.all(weights <= 0):
        weights = np.ones(len(pooled))
    result = lloyd(pooled, k, rng=rng, sample_weights=weights)
    return result.centroids


def ffcm(dataset: Dataset, plan: PartitionPlan, k: int, rounds: int = 1,
         variant: str = "v2", fuzzifier: float = 2.0, seed=0) -> np.ndarray:
    """Federated fuzzy c-means with per-round aggregation.

    After the first round, clients initialize from the current global
    centroids, so this is the one baseline that uses more than a single
    communication round when ``rounds`` > 1.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if variant not in ("v1", "v2"):
        raise ValueError(f"unknown variant {variant!r}")
    global_centroids: np.ndarray | None = None
    server_rng = rng_from(seed, 3)

    for _ in range(rounds):
        init = global_centroids

        def run(m: int) -> FuzzySolution:
            points = dataset.points[plan.client_indices(m)]
            if points.shape[0] == 0:
                raise ValueError(f"client {m} holds no points")
            if points.shape[0] < k:
                raise ValueError(f"client {m} holds fewer than k={k} points")
            return fuzzy_cmeans(
                points, k, fuzzifier=fuzzifier, rng=client_seed_rng(seed, m),
                init_centroids=init,
            )

        solutions = parallel_map(run, list(range(plan.n_clients)))
        if variant == "v1":
            reference = global_centroids if global_centroids is not None else solutions[0].centroids
            global_centroids = _aggregate_v1(reference, solutions, k)
        else:
            global_centroids = _aggregate_v2(solutions, k, server_rng)
    return global_centroids
