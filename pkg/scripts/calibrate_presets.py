#!/usr/bin/env python3
"""Calibrate the mixture presets' stddevs to their target overlap levels.

Overlap here means: the fraction of sampled points whose second-nearest
true center lies within ``OVERLAP_FACTOR`` times the distance of their own
center.  The script bisects the component stddev on the shared 15-center
layout until the Monte-Carlo overlap estimate hits each target, and prints
the values frozen in ``fedkmeans.presets.S_STDDEVS``.

Usage: python scripts/calibrate_presets.py [n_samples]
"""

import sys

import numpy as np

sys.path.insert(0, "src")

from fedkmeans.presets import S_LAYOUT  # noqa: E402

TARGETS = {"s1": 0.09, "s2": 0.22, "s3": 0.41, "s4": 0.44}
OVERLAP_FACTOR = 6.0


def overlap_fraction(sigma: float, n: int, seed: int = 123) -> float:
    rng = np.random.default_rng(seed)
    k = S_LAYOUT.shape[0]
    labels = rng.integers(0, k, size=n)
    pts = S_LAYOUT[labels] + rng.standard_normal((n, 2)) * sigma
    diff = pts[:, None, :] - S_LAYOUT[None, :, :]
    dists = np.sqrt((diff**2).sum(axis=2))
    d_own = dists[np.arange(n), labels]
    dists[np.arange(n), labels] = np.inf
    d_other = dists.min(axis=1)
    return float(np.mean(d_other < OVERLAP_FACTOR * d_own))


def calibrate(target: float, n: int, lo: float = 1e3, hi: float = 3e5) -> float:
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if overlap_fraction(mid, n) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def main() -> None:
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
    for name, target in TARGETS.items():
        sigma = calibrate(target, n)
        print(f'    "{name}": {sigma:.1f},  # overlap {overlap_fraction(sigma, n):.4f}')


if __name__ == "__main__":
    main()
