"""One-shot federated pipeline orchestration.

Each client independently runs Lloyd, refines its solution, and attaches
radii; the pooled centroid-radius payloads cross the wire once and the
server groups and averages them.  Clients are pure functions of their data
slice and a per-client seed derived from (run seed, client id), so results
do not depend on execution order or thread count.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import Dataset, PartitionPlan, rng_from
from .kmeans import ClusterSolution, lloyd
from .radius import CentroidRadius, DegenerateRadiusError, assign_empirical, assign_theoretical
from .refine import RefinedSolution, refine
from .server import AggregationResult, aggregate

logger = logging.getLogger(__name__)

THREADS_ENV = "FEDKMEANS_THREADS"


def max_threads() -> int:
    value = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Order-preserving map, threaded when FEDKMEANS_THREADS > 1."""
    workers = max_threads()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class FecaConfig:
    """Knobs for one federated run."""

    k: int
    client_k: int | None = None  # per-client Lloyd k; defaults to k
    radius_variant: str = "empirical"  # or "theoretical"
    remove_one_fit_many: bool = True
    seed: int = 0
    restarts: int = 1  # Lloyd restarts per client; 1 keeps local solutions frequent
    init: str = "kmeans++"
    weight_by_cluster_size: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.client_k is not None and self.client_k < 1:
            raise ValueError("client_k must be >= 1")
        if self.radius_variant not in ("empirical", "theoretical"):
            raise ValueError(f"unknown radius variant {self.radius_variant!r}")

    @property
    def effective_client_k(self) -> int:
        return self.k if self.client_k is None else self.client_k


@dataclass(frozen=True)
class Message:
    """One logged transmission in the simulated network."""

    sender: str
    receiver: str
    n_items: int


@dataclass(frozen=True)
class FecaRun:
    """Everything a single pipeline execution produced."""

    aggregation: AggregationResult
    payloads: list[list[CentroidRadius]]  # one list per client, client order
    messages: list[Message]
    client_solutions: list[ClusterSolution]

    @property
    def pooled_pairs(self) -> list[CentroidRadius]:
        return [p for payload in self.payloads for p in payload]

    @property
    def final_centroids(self) -> np.ndarray:
        return self.aggregation.final_centroids


def client_seed_rng(seed, client_id: int) -> np.random.Generator:
    """Per-client generator derived from the run seed and the client id."""
    return rng_from(seed, 2, client_id)


def client_payload(points: np.ndarray, client_id: int,
                   config: FecaConfig) -> tuple[list[CentroidRadius], ClusterSolution]:
    """Run one client: Lloyd, refinement, radius assignment.

    Clients holding fewer points than the configured local k run with k
    clamped to their point count.  A degenerate gap estimate under the
    theoretical radius variant falls back to the empirical one.
    """
    n = points.shape[0]
    if n == 0:
        raise ValueError(f"client {client_id} holds no points")
    k = config.effective_client_k
    if k > n:
        logger.warning("client %d holds %d points; clamping local k from %d", client_id, n, k)
        k = n
    rng = client_seed_rng(config.seed, client_id)
    best = None
    for _ in range(max(1, config.restarts)):
        solution = lloyd(points, k, rng=rng, init=config.init)
        if best is None or solution.objective < best.objective:
            best = solution
    if config.remove_one_fit_many:
        refined = refine(best, points)
    else:
        refined = RefinedSolution.from_solution(best)
    if config.radius_variant == "theoretical" and refined.k >= 2:
        try:
            pairs = assign_theoretical(refined, points, client=client_id)
        except DegenerateRadiusError:
            logger.warning(
                "client %d: degenerate gap estimate, falling back to empirical radii", client_id
            )
            pairs = assign_empirical(refined, points, client=client_id)
    else:
        pairs = assign_empirical(refined, points, client=client_id)
    return pairs, best


def run_feca_on_subsets(subsets: list[np.ndarray], config: FecaConfig) -> FecaRun:
    """Run the pipeline on explicit per-client point blocks."""
    if not subsets:
        raise ValueError("no client subsets")
    results = parallel_map(
        lambda item: client_payload(item[1], item[0], config), list(enumerate(subsets))
    )
    payloads = [pairs for pairs, _ in results]
    solutions = [sol for _, sol in results]
    messages = [
        Message(sender=f"client{m}", receiver="server", n_items=len(p))
        for m, p in enumerate(payloads)
    ]
    pooled = [p for payload in payloads for p in payload]
    result = aggregate(pooled, config.k, weight_by_cluster_size=config.weight_by_cluster_size)
    if result.underfull:
        logger.warning("aggregation produced %d groups for requested k=%d", result.k, config.k)
    return FecaRun(result, payloads, messages, solutions)


def run_feca(dataset: Dataset, plan: PartitionPlan, config: FecaConfig) -> FecaRun:
    """Split the dataset by the partition plan and run the full pipeline."""
    if config.k > dataset.n:
        raise ValueError(f"k={config.k} exceeds the dataset size {dataset.n}")
    subsets = [dataset.points[plan.client_indices(m)] for m in range(plan.n_clients)]
    for m, block in enumerate(subsets):
        if block.shape[0] == 0:
            raise ValueError(f"client {m} holds no points")
    return run_feca_on_subsets(subsets, config)


def run_centralized(dataset: Dataset, k: int, seed, init: str = "kmeans++",
                    restarts: int = 1) -> ClusterSolution:
    """Plain Lloyd on the undivided dataset (the non-federated benchmark)."""
    rng = rng_from(seed)
    best = None
    for _ in range(max(1, restarts)):
        solution = lloyd(dataset.points, k, rng=rng, init=init)
        if best is None or solution.objective < best.objective:
            best = solution
    return best
