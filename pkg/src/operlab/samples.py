"""Reproducible problem instances shared by tests and scripts."""

from __future__ import annotations

from typing import List

import numpy as np

from .repspace import GaudinConfig, build_sector


def fixture_config() -> GaudinConfig:
    """t = (0, 1, 2), weights (1, 1, 1) and 1 at infinity; n = 1."""
    return GaudinConfig((0, 1, 2), (1, 1, 1, 1))


def _generic_points(rng, count: int, min_gap: float = 0.4) -> tuple:
    while True:
        t = np.sort(np.round(rng.uniform(-2.0, 3.0, size=count), 3))
        if count < 2 or np.diff(t).min() >= min_gap:
            return tuple(float(x) for x in t)


def random_dominant_configs(count: int, seed: int = 0, max_m: int = 4, max_dim: int = 20,
                            max_weight: int = 3) -> List[GaudinConfig]:
    """Dominant integral weights, real points, 1 <= capped sector dim <= max_dim."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        m = int(rng.integers(1, max_m + 1))
        lam = [int(x) for x in rng.integers(1, max_weight + 1, size=m + 1)]
        n_max = sum(lam) // 2
        n = int(rng.integers(1, n_max + 1)) if n_max >= 1 else 0
        cfg = GaudinConfig.with_n(_generic_points(rng, m + 1), lam, n)
        dim = build_sector(cfg, capped=True).dim
        if 1 <= dim <= max_dim:
            out.append(cfg)
    return out


def random_negative_configs(count: int, seed: int = 0, max_m: int = 3, max_n: int = 4) -> List[GaudinConfig]:
    """Weights -r_i with r_i in {1, 2, 3} at real points."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        m = int(rng.integers(1, max_m + 1))
        lam = [-int(x) for x in rng.integers(1, 4, size=m + 1)]
        n = int(rng.integers(1, max_n + 1))
        out.append(GaudinConfig.with_n(_generic_points(rng, m + 1), lam, n))
    return out
