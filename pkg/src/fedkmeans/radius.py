"""Radius assignment for refined client centroids.

Each centroid a client ships to the server carries a radius the server
uses to group centroids from different clients.  Two variants:

* ``assign_theoretical`` drops centroid pairs whose in-cluster extents
  overlap, estimates the true inter-cluster gap from the survivors, and
  assigns the same radius (half that gap) to every centroid.
* ``assign_empirical`` gives each centroid its own radius: the smaller of
  its in-cluster extent and half the distance to its nearest sibling
  centroid, so crowded centroids get small radii and never absorb their
  neighbors.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .refine import RefinedSolution

DEFAULT_RADIUS_FLOOR = 1e-9


class DegenerateRadiusError(ValueError):
    """Raised when the overlap filter leaves fewer than two centroids, so
    no inter-cluster gap can be estimated."""


@dataclass(frozen=True)
class CentroidRadius:
    """One centroid-radius pair: the unit shipped from client to server."""

    centroid: np.ndarray
    radius: float
    client: int
    cluster_size: int

    def __post_init__(self):
        object.__setattr__(self, "centroid", np.asarray(self.centroid, dtype=float))
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"radius must be finite and > 0, got {self.radius}")


def _cluster_extents(points: np.ndarray, refined: RefinedSolution) -> np.ndarray:
    """Max point-to-centroid distance per cluster; NaN for empty clusters."""
    extents = np.full(refined.k, np.nan)
    for j, idx in enumerate(refined.clusters):
        if idx.size > 0:
            extents[j] = float(np.linalg.norm(points[idx] - refined.centroids[j], axis=1).max())
    return extents


def _pairwise_distances(centroids: np.ndarray) -> np.ndarray:
    diff = centroids[:, None, :] - centroids[None, :, :]
    return np.sqrt((diff**2).sum(axis=2))


def assign_theoretical(refined: RefinedSolution, points: np.ndarray,
                       client: int = 0) -> list[CentroidRadius]:
    """Uniform per-client radius from the filtered minimum centroid gap.

    Centroids whose cluster extents overlap with their nearest neighbor are
    excluded from the gap estimate (both ends of the pair), but every
    centroid of the input still receives the resulting radius.
    """
    if refined.k < 2:
        raise DegenerateRadiusError("need at least two centroids to estimate a gap")
    extents = _cluster_extents(points, refined)
    dists = _pairwise_distances(refined.centroids)
    np.fill_diagonal(dists, np.inf)

    # empty clusters have no extent estimate and cannot enter the filter
    kept = [j for j in range(refined.k) if not np.isnan(extents[j])]
    for i in list(kept):
        if i not in kept:
            continue
        others = [j for j in kept if j != i]
        if not others:
            break
        j = others[int(np.argmin(dists[i, others]))]
        if extents[i] + extents[j] > dists[i, j]:
            kept.remove(i)
            kept.remove(j)
    if len(kept) < 2:
        raise DegenerateRadiusError(
            "overlap filter left fewer than two centroids; no gap estimate"
        )
    gap = float(dists[np.ix_(kept, kept)].min())
    radius = gap / 2.0
    return [
        CentroidRadius(refined.centroids[j], radius, client, int(refined.clusters[j].size))
        for j in range(refined.k)
    ]


def assign_empirical(refined: RefinedSolution, points: np.ndarray, client: int = 0,
                     radius_floor: float = DEFAULT_RADIUS_FLOOR) -> list[CentroidRadius]:
    """Per-centroid radius: min(in-cluster extent, half nearest-sibling gap).

    Clusters with fewer than two points have no usable extent and fall back
    to the sibling half-gap alone; a client with a single centroid falls
    back to its extent.  ``radius_floor`` keeps fully degenerate pairs
    (single centroid over a single point) participating in grouping without
    absorbing anything.
    """
    if refined.k < 1:
        raise ValueError("no centroids to assign radii to")
    extents = _cluster_extents(points, refined)
    # a singleton cluster's extent is identically zero: no real spread estimate
    extents[np.array([idx.size < 2 for idx in refined.clusters])] = np.nan
    if refined.k == 1:
        radius = extents[0] if not np.isnan(extents[0]) else 0.0
        return [
            CentroidRadius(
                refined.centroids[0],
                max(float(radius), radius_floor),
                client,
                int(refined.clusters[0].size),
            )
        ]
    dists = _pairwise_distances(refined.centroids)
    np.fill_diagonal(dists, np.inf)
    half_gaps = dists.min(axis=1) / 2.0
    pairs = []
    for j in range(refined.k):
        radius = half_gaps[j] if np.isnan(extents[j]) else min(extents[j], half_gaps[j])
        pairs.append(
            CentroidRadius(
                refined.centroids[j],
                max(float(radius), radius_floor),
                client,
                int(refined.clusters[j].size),
            )
        )
    return pairs


# ---------------------------------------------------------------------------
# Wire format: this CSV is the client-to-server payload in the simulator.


def save_payload(pairs: list[CentroidRadius], path) -> None:
    if not pairs:
        raise ValueError("no pairs to serialize")
    dim = pairs[0].centroid.shape[0]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["client"] + [f"x{j}" for j in range(dim)] + ["radius", "cluster_size"])
        for p in pairs:
            writer.writerow(
                [p.client] + [repr(v) for v in p.centroid] + [repr(p.radius), p.cluster_size]
            )


def load_payload(path) -> list[CentroidRadius]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "client" or header[-2:] != ["radius", "cluster_size"]:
            raise ValueError(f"{path}: expected header client,x0..,radius,cluster_size")
        dim = len(header) - 3
        pairs = []
        for row in reader:
            if not row:
                continue
            pairs.append(
                CentroidRadius(
                    np.array([float(v) for v in row[1 : 1 + dim]]),
                    float(row[1 + dim]),
                    int(row[0]),
                    int(row[2 + dim]),
                )
            )
    return pairs
