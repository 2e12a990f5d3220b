from typing import Optional

import numpy as np
from scipy.signal import lfilter

from cctrends.models.types import DgpConfig, Provenance, TimeSeriesPanel


def rng_for(seed: int, *spawn_key: int) -> np.random.Generator:
    """PCG64 generator on the substream (seed, spawn_key)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=spawn_key)))


def simulate_dgp(cfg: DgpConfig, rng: Optional[np.random.Generator] = None) -> TimeSeriesPanel:
    """
    Simulate ΔX_t = αβ′X_{t−1} + ε_t from X_0 = 0, t = 1..T.

    With β = (I_{p−s}, 0)′ and α = −aβ the first p−s coordinates follow
    X_t = (1−a)X_{t−1} + ε_t and the last s are random walks. ε_t is
    standard normal; no burn-in.

    Args:
        cfg: Dimensions, adjustment a, sample size and seed
        rng: Generator to draw from; defaults to one seeded by cfg.seed

    Returns:
        TimeSeriesPanel with X_0 = 0 recorded as t0_row
    """
    if rng is None:
        rng = rng_for(cfg.seed)
    eps = rng.standard_normal((cfg.T, cfg.p))
    r = cfg.p - cfg.s

    X = np.empty_like(eps)
    if r:
        X[:, :r] = lfilter([1.0], [1.0, -(1.0 - cfg.a)], eps[:, :r], axis=0)
    if cfg.s:
        X[:, r:] = np.cumsum(eps[:, r:], axis=0)

    return TimeSeriesPanel(
        values=X,
        labels=[f"x{i + 1}" for i in range(cfg.p)],
        t0_row=np.zeros(cfg.p),
        provenance=Provenance(source=f"dgp(p={cfg.p}, s={cfg.s}, a={cfg.a}, T={cfg.T}, seed={cfg.seed})"),
    )
