"""Evaluation stack: matched center distance, purity, NMI, the
radius-coverage diagnostic, and the comparable per-run report record."""

from __future__ import annotations

import csv
import datetime
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .data import Dataset
from .kmeans import as_points, assign_points, objective
from .radius import CentroidRadius


def matched_center_distance(recovered, true_centers) -> tuple[float, float, int]:
    """Exact one-to-one matching of recovered centroids to true centers.

    Matches min(#recovered, #true) pairs by minimum-cost assignment on
    Euclidean distances and returns (mean distance, mean squared distance,
    number of unmatched true centers).
    """
    rec = as_points(recovered)
    true = as_points(true_centers)
    if rec.shape[0] < 1 or true.shape[0] < 1:
        raise ValueError("both centroid sets must be non-empty")
    diff = rec[:, None, :] - true[None, :, :]
    dists = np.sqrt((diff**2).sum(axis=2))
    rows, cols = linear_sum_assignment(dists)
    matched = dists[rows, cols]
    unmatched_true = true.shape[0] - len(cols)
    return float(matched.mean()), float((matched**2).mean()), int(unmatched_true)


def purity(assignment, labels) -> float:
    """Fraction of points whose cluster's plurality label matches their own."""
    assignment = np.asarray(assignment, dtype=int)
    labels = np.asarray(labels, dtype=int)
    if assignment.shape != labels.shape:
        raise ValueError("assignment and labels must have equal length")
    total = 0
    for c in np.unique(assignment):
        counts = np.bincount(labels[assignment == c])
        total += int(counts.max())
    return total / len(labels)


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def nmi(assignment, labels) -> float:
    """Normalized mutual information 2*I/(H_x + H_y), natural log.

    Two trivial one-block partitions agree perfectly (1.0); if exactly one
    side is one block the mutual information is zero (0.0).
    """
    x = np.asarray(assignment, dtype=int)
    y = np.asarray(labels, dtype=int)
    if x.shape != y.shape:
        raise ValueError("assignment and labels must have equal length")
    xs, x_idx = np.unique(x, return_inverse=True)
    ys, y_idx = np.unique(y, return_inverse=True)
    joint = np.zeros((len(xs), len(ys)))
    np.add.at(joint, (x_idx, y_idx), 1)
    hx = _entropy(joint.sum(axis=1))
    hy = _entropy(joint.sum(axis=0))
    if hx == 0.0 and hy == 0.0:
        return 1.0
    if hx == 0.0 or hy == 0.0:
        return 0.0
    n = joint.sum()
    pxy = joint / n
    px = pxy.sum(axis=1, keepdims=True)
    py = pxy.sum(axis=0, keepdims=True)
    mask = pxy > 0
    mi = float((pxy[mask] * np.log(pxy[mask] / (px @ py)[mask])).sum())
    return 2.0 * mi / (hx + hy)


def sigma_diagnostic(pairs: list[CentroidRadius], true_centers) -> np.ndarray:
    """Per-pair grouping-safety ratio.

    Each shipped centroid is matched to its nearest true center; its ratio
    is the distance to that center divided by the radius of the pair the
    server would select for that center's group (the largest radius among
    the pairs matched to it).  Values at or below 0.5 certify that the
    selected ball covers the centroid, so the server groups it correctly.
    """
    true = as_points(true_centers)
    if not pairs:
        raise ValueError("no pairs to diagnose")
    centroids = np.vstack([p.centroid for p in pairs])
    radii = np.array([p.radius for p in pairs])
    if np.any(radii <= 0):
        raise ValueError("sigma diagnostic requires positive radii")
    dists = np.sqrt(((centroids[:, None, :] - true[None, :, :]) ** 2).sum(axis=2))
    nearest = dists.argmin(axis=1)
    d_own = dists[np.arange(len(pairs)), nearest]
    sigmas = np.empty(len(pairs))
    for s in np.unique(nearest):
        mask = nearest == s
        sigmas[mask] = d_own[mask] / radii[mask].max()
    return sigmas


@dataclass
class EvalReport:
    """One comparable evaluation record per (method, seed) run."""

    method: str
    seed: int
    matched_l2: float | None = None
    matched_mse: float | None = None
    purity: float | None = None
    nmi: float | None = None
    objective: float | None = None
    sigma_max: float | None = None
    unmatched_true_centers: int | None = None
    metadata: dict = field(default_factory=dict)

    COLUMNS = (
        "method",
        "seed",
        "matched_l2",
        "matched_mse",
        "purity",
        "nmi",
        "objective",
        "sigma_max",
        "unmatched_true_centers",
        "metadata",
        "timestamp",
    )

    def row(self) -> list[str]:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, float):
                return repr(v)
            return str(v)

        meta = ";".join(f"{k}={self.metadata[k]}" for k in sorted(self.metadata))
        return [
            self.method,
            str(self.seed),
            fmt(self.matched_l2),
            fmt(self.matched_mse),
            fmt(self.purity),
            fmt(self.nmi),
            fmt(self.objective),
            fmt(self.sigma_max),
            fmt(self.unmatched_true_centers),
            meta,
            datetime.datetime.now(datetime.timezone.utc).isoformat(),
        ]


def evaluate(dataset: Dataset, recovered_centroids, method: str, seed: int,
             pairs: list[CentroidRadius] | None = None,
             metadata: dict | None = None) -> EvalReport:
    """Score recovered centroids against a dataset's ground truth.

    Matched-distance fields need ``true_centers``; purity/NMI need labels
    (points are assigned to their nearest recovered centroid first); the
    sigma diagnostic needs both shipped pairs and true centers.
    """
    rec = as_points(recovered_centroids)
    report = EvalReport(method=method, seed=seed, metadata=dict(metadata or {}))
    report.objective = objective(dataset.points, rec)
    if dataset.true_centers is not None:
        l2, mse, unmatched = matched_center_distance(rec, dataset.true_centers)
        report.matched_l2 = l2
        report.matched_mse = mse
        report.unmatched_true_centers = unmatched
        if pairs:
            report.sigma_max = float(sigma_diagnostic(pairs, dataset.true_centers).max())
    if dataset.labels is not None:
        assignment, _ = assign_points(dataset.points, rec)
        report.purity = purity(assignment, dataset.labels)
        report.nmi = nmi(assignment, dataset.labels)
    return report


def append_reports(reports: list[EvalReport], path) -> None:
    """Append rows to a results CSV, writing the header when new/empty."""
    new_file = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh)
        if new_file:
            writer.writerow(EvalReport.COLUMNS)
        for report in reports:
            writer.writerow(report.row())
