"""Datasets, synthetic generators, federated partitioners, and CSV IO.

A dataset is a plain N x d point matrix with optional per-point integer
labels and optional ground-truth centers.  Generators cover isotropic
Gaussian mixtures and the disjoint-uniform-ball model; partitioners cover
uniform (IID) splits and class-conditional Dirichlet splits.

CSV conventions: feature columns are named ``x0..x{d-1}``, with an optional
trailing ``label`` column.  Partition plans serialize as
``point_index,client`` rows; centroid sets as ``centroid_index,x0..``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


class CsvFormatError(ValueError):
    """Malformed CSV input (bad header, ragged or non-numeric row)."""


def _as_matrix(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class Dataset:
    """Points in R^d with optional ground truth.

    ``labels[i]`` is the index of the true cluster of point i and
    ``true_centers`` holds one row per true cluster; both are optional and
    only used by generators, evaluators, and the Dirichlet partitioner.
    """

    points: np.ndarray
    labels: np.ndarray | None = None
    true_centers: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "points", _as_matrix(self.points, "points"))
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=int)
            if labels.shape != (self.n,):
                raise ValueError("labels must be one integer per point")
            if labels.min() < 0:
                raise ValueError("labels must be non-negative")
            object.__setattr__(self, "labels", labels)
        if self.true_centers is not None:
            centers = _as_matrix(self.true_centers, "true_centers")
            if centers.shape[1] != self.dim:
                raise ValueError("true_centers dimension does not match points")
            if self.labels is not None and self.labels.max() >= centers.shape[0]:
                raise ValueError("label index exceeds true_centers row count")
            object.__setattr__(self, "true_centers", centers)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class GmmSpec:
    """Isotropic Gaussian mixture: one component per center row."""

    centers: np.ndarray
    stddevs: np.ndarray  # scalar or one per component
    points_per_component: int

    def __post_init__(self):
        centers = _as_matrix(self.centers, "centers")
        object.__setattr__(self, "centers", centers)
        stddevs = np.broadcast_to(np.asarray(self.stddevs, dtype=float), (centers.shape[0],)).copy()
        if np.any(stddevs < 0) or not np.all(np.isfinite(stddevs)):
            raise ValueError("stddevs must be finite and >= 0")
        object.__setattr__(self, "stddevs", stddevs)
        if self.points_per_component < 1:
            raise ValueError("points_per_component must be >= 1")

    @property
    def n_components(self) -> int:
        return self.centers.shape[0]


@dataclass(frozen=True)
class SbmSpec:
    """Disjoint uniform balls of common radius, one per center row."""

    centers: np.ndarray
    radius: float
    points_per_component: int

    def __post_init__(self):
        centers = _as_matrix(self.centers, "centers")
        object.__setattr__(self, "centers", centers)
        if not self.radius > 0:
            raise ValueError("radius must be > 0")
        if self.points_per_component < 1:
            raise ValueError("points_per_component must be >= 1")
        if centers.shape[0] > 1 and self.min_center_distance <= 2 * self.radius:
            raise ValueError(
                "balls overlap: minimum center distance "
                f"{self.min_center_distance:g} must exceed 2*radius = {2 * self.radius:g}"
            )

    @property
    def n_components(self) -> int:
        return self.centers.shape[0]

    def _pairwise_center_distances(self) -> np.ndarray:
        diff = self.centers[:, None, :] - self.centers[None, :, :]
        dists = np.sqrt((diff**2).sum(axis=2))
        return dists[np.triu_indices(self.centers.shape[0], k=1)]

    @property
    def min_center_distance(self) -> float:
        return float(self._pairwise_center_distances().min())

    @property
    def max_center_distance(self) -> float:
        return float(self._pairwise_center_distances().max())


@dataclass(frozen=True)
class PartitionPlan:
    """Assignment of every point index to one of ``n_clients`` clients."""

    client_of: np.ndarray
    n_clients: int

    def __post_init__(self):
        client_of = np.asarray(self.client_of, dtype=int)
        if client_of.ndim != 1 or client_of.size < 1:
            raise ValueError("client_of must be a non-empty 1-D array")
        if self.n_clients < 1:
            raise ValueError("n_clients must be >= 1")
        if client_of.min() < 0 or client_of.max() >= self.n_clients:
            raise ValueError("client index out of range")
        object.__setattr__(self, "client_of", client_of)

    def client_indices(self, client: int) -> np.ndarray:
        return np.flatnonzero(self.client_of == client)

    def client_sizes(self) -> np.ndarray:
        return np.bincount(self.client_of, minlength=self.n_clients)


def rng_from(seed, *key: int) -> np.random.Generator:
    """Deterministic generator for (seed, key); independent across keys."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def generate_gmm(spec: GmmSpec, seed) -> Dataset:
    """Sample ``points_per_component`` points around each mixture center."""
    rng = rng_from(seed)
    k, d = spec.centers.shape
    ppc = spec.points_per_component
    noise = rng.standard_normal((k, ppc, d))
    points = spec.centers[:, None, :] + noise * spec.stddevs[:, None, None]
    labels = np.repeat(np.arange(k), ppc)
    return Dataset(points.reshape(k * ppc, d), labels=labels, true_centers=spec.centers)


def sample_ball(rng: np.random.Generator, n: int, dim: int, radius: float = 1.0) -> np.ndarray:
    """Uniform samples from the d-ball: normalized Gaussian direction
    scaled by u**(1/d), so no rejection step is needed."""
    directions = rng.standard_normal((n, dim))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    # a zero-norm draw has probability 0; guard anyway
    norms[norms == 0] = 1.0
    radii = rng.uniform(size=(n, 1)) ** (1.0 / dim)
    return directions / norms * radii * radius


def generate_sbm(spec: SbmSpec, seed) -> Dataset:
    """Sample points uniformly from each ball component."""
    rng = rng_from(seed)
    k, d = spec.centers.shape
    ppc = spec.points_per_component
    blocks = [spec.centers[s] + sample_ball(rng, ppc, d, spec.radius) for s in range(k)]
    labels = np.repeat(np.arange(k), ppc)
    return Dataset(np.vstack(blocks), labels=labels, true_centers=spec.centers)


def partition_iid(dataset: Dataset, n_clients: int, seed) -> PartitionPlan:
    """Uniform split: random permutation, then round-robin assignment.

    Client sizes differ by at most one.
    """
    if n_clients < 1:
        raise ValueError("n_clients must be >= 1")
    if n_clients > dataset.n:
        raise ValueError(f"cannot split {dataset.n} points across {n_clients} clients")
    rng = rng_from(seed)
    perm = rng.permutation(dataset.n)
    client_of = np.empty(dataset.n, dtype=int)
    client_of[perm] = np.arange(dataset.n) % n_clients
    return PartitionPlan(client_of, n_clients)


def partition_dirichlet(dataset: Dataset, n_clients: int, alpha: float, seed) -> PartitionPlan:
    """Class-conditional non-IID split.

    For each true class, client proportions are drawn from Dirichlet(alpha)
    and the class's points are allocated multinomially by those proportions.
    Smaller alpha concentrates each class on fewer clients.
    """
    if dataset.labels is None:
        raise ValueError("Dirichlet partitioning requires a labeled dataset")
    if n_clients < 1:
        raise ValueError("n_clients must be >= 1")
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    rng = rng_from(seed)
    client_of = np.empty(dataset.n, dtype=int)
    for cls in np.unique(dataset.labels):
        idx = np.flatnonzero(dataset.labels == cls)
        rng.shuffle(idx)
        proportions = rng.dirichlet(np.full(n_clients, alpha))
        counts = rng.multinomial(idx.size, proportions)
        client_of[idx] = np.repeat(np.arange(n_clients), counts)
    return PartitionPlan(client_of, n_clients)


# ---------------------------------------------------------------------------
# CSV IO


def _feature_header(dim: int) -> list[str]:
    return [f"x{j}" for j in range(dim)]


def save_csv(dataset: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = _feature_header(dataset.dim)
        if dataset.labels is not None:
            header.append("label")
        writer.writerow(header)
        for i in range(dataset.n):
            row = [repr(v) for v in dataset.points[i]]
            if dataset.labels is not None:
                row.append(str(int(dataset.labels[i])))
            writer.writerow(row)


def load_csv(path) -> Dataset:
    """Load a dataset saved by :func:`save_csv` (or any conforming file)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file") from None
        has_label = header and header[-1] == "label"
        dim = len(header) - (1 if has_label else 0)
        if dim < 1 or header[:dim] != _feature_header(dim):
            raise CsvFormatError(f"{path}: header must be x0..x{{d-1}}[,label], got {header}")
        points, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CsvFormatError(
                    f"{path}: line {lineno}: expected {len(header)} columns, got {len(row)}"
                )
            try:
                points.append([float(v) for v in row[:dim]])
                if has_label:
                    labels.append(int(row[dim]))
            except ValueError as exc:
                raise CsvFormatError(f"{path}: line {lineno}: {exc}") from None
    if not points:
        raise CsvFormatError(f"{path}: no data rows")
    return Dataset(np.array(points), labels=np.array(labels) if has_label else None)


def save_partition(plan: PartitionPlan, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["point_index", "client"])
        for i, c in enumerate(plan.client_of):
            writer.writerow([i, int(c)])


def load_partition(path) -> PartitionPlan:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["point_index", "client"]:
            raise CsvFormatError(f"{path}: expected header point_index,client")
        pairs = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                pairs[int(row[0])] = int(row[1])
            except (ValueError, IndexError) as exc:
                raise CsvFormatError(f"{path}: line {lineno}: {exc}") from None
    if sorted(pairs) != list(range(len(pairs))):
        raise CsvFormatError(f"{path}: point indices must cover 0..N-1 exactly once")
    client_of = np.array([pairs[i] for i in range(len(pairs))])
    return PartitionPlan(client_of, int(client_of.max()) + 1)


def save_centroids(centroids: np.ndarray, path) -> None:
    centroids = _as_matrix(centroids, "centroids")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["centroid_index"] + _feature_header(centroids.shape[1]))
        for i, c in enumerate(centroids):
            writer.writerow([i] + [repr(v) for v in c])


def load_centroids(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "centroid_index":
            raise CsvFormatError(f"{path}: expected header centroid_index,x0..")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise CsvFormatError(f"{path}: line {lineno}: {exc}") from None
    if not rows:
        raise CsvFormatError(f"{path}: no centroids")
    return np.array(rows)
