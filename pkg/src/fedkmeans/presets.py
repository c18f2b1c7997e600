"""Built-in dataset presets.

``s1``..``s4`` share one 15-center 2-D layout (coordinates on the 1e5
scale) and differ only in component spread: their stddevs were calibrated
by ``scripts/calibrate_presets.py`` so that 9/22/41/44 percent of sampled
points count as overlapping, where a point overlaps when its
second-nearest true center lies within six times the distance of its
generating center.  ``sbm-thm`` is a disjoint-ball instance whose
separation satisfies the grouping guarantees checked by ``theorem-check``;
``tiny-oracle`` is small enough for the exact brute-force solver.
"""

from __future__ import annotations

import math

import numpy as np

from .data import Dataset, GmmSpec, SbmSpec, generate_gmm, generate_sbm

S_LAYOUT = np.array(
    [
        (1.5, 8.5), (3.4, 8.0), (5.6, 8.6), (8.3, 8.3),
        (1.2, 6.0), (3.0, 5.4), (5.0, 6.2), (7.0, 6.5), (8.7, 5.6),
        (2.0, 3.3), (4.2, 3.8), (6.3, 3.5),
        (1.4, 1.3), (4.8, 1.5), (7.8, 1.8),
    ]
) * 1e5

# calibrated overlap fractions: s1=0.09, s2=0.22, s3=0.41, s4=0.44
S_STDDEVS = {
    "s1": 14942.7,
    "s2": 19100.3,
    "s3": 25109.6,
    "s4": 26193.4,
}

# 15 components x 334 points (ceil(5000 / 15))
S_POINTS_PER_COMPONENT = 334

SBM_THM_SEPARATION = 2e6
SBM_THM_RADIUS = 1.0
SBM_THM_POINTS_PER_COMPONENT = 200
SBM_THM_LAMBDA = 3.0
SBM_THM_ETA = 5.0


def equilateral_centers(side: float) -> np.ndarray:
    """Three 2-D centers at mutual distance ``side``."""
    return np.array([(0.0, 0.0), (side, 0.0), (side / 2.0, side * math.sqrt(3.0) / 2.0)])


def gmm_preset(name: str, points_per_component: int | None = None) -> GmmSpec:
    if name not in S_STDDEVS:
        raise KeyError(f"unknown mixture preset {name!r}")
    ppc = S_POINTS_PER_COMPONENT if points_per_component is None else points_per_component
    return GmmSpec(S_LAYOUT, S_STDDEVS[name], ppc)


def sbm_thm_preset(points_per_component: int | None = None) -> SbmSpec:
    ppc = SBM_THM_POINTS_PER_COMPONENT if points_per_component is None else points_per_component
    return SbmSpec(equilateral_centers(SBM_THM_SEPARATION), SBM_THM_RADIUS, ppc)


def tiny_oracle_preset() -> GmmSpec:
    centers = np.array([(0.0, 0.0), (10.0, 10.0), (20.0, 0.0)])
    return GmmSpec(centers, 0.1, 3)


PRESET_NAMES = ("s1", "s2", "s3", "s4", "sbm-thm", "tiny-oracle")


def make_dataset(name: str, seed=0, points_per_component: int | None = None) -> Dataset:
    """Instantiate a preset by name with a fixed generation seed."""
    if name in S_STDDEVS:
        return generate_gmm(gmm_preset(name, points_per_component), seed)
    if name == "sbm-thm":
        return generate_sbm(sbm_thm_preset(points_per_component), seed)
    if name == "tiny-oracle":
        return generate_gmm(tiny_oracle_preset(), seed)
    raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
