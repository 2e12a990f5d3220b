from concurrent.futures import ThreadPoolExecutor
from os import cpu_count
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple
import json
import logging
import math

import numpy as np
import pandas as pd
from tqdm import tqdm

from cctrends.basis.design import build_design, default_K
from cctrends.cache.lru import LRUCache, cache_key
from cctrends.cca.core import basis_factor, cca
from cctrends.errors import AnalysisError, DimensionError, NumericalError
from cctrends.mc.dgp import rng_for, simulate_dgp
from cctrends.models.types import (
    BasisMatrix,
    CountMethod,
    DgpConfig,
    ExperimentResult,
    LimitLawCatalog,
)
from cctrends.trends.count import count_trends

logger = logging.getLogger(__name__)

FAILURE_LIMIT = 0.01
STANDARD_P = (10, 20, 50, 100, 200, 300)
DESK_P = (10, 20)
T_RATIOS = (10, 20, 30)
A_VALUES = (1.0, 0.75, 0.5)
S_FRACTIONS = (0.0, 0.25, 0.5, 0.75, 1.0)

basis_cache: LRUCache[BasisMatrix] = LRUCache(max_entries=32)


def cached_design(K: int, T: int) -> BasisMatrix:
    """KL design with its M_dd factor, shared across replications."""
    key = cache_key("KL", K, T)
    d = basis_cache.get(key)
    if d is None:
        d = build_design(K, T)
        basis_factor(d)
        basis_cache.put(key, d)
    return d


def paper_grid(
    p_values: Sequence[int] = DESK_P,
    full: bool = False,
    seed: int = 0,
) -> List[DgpConfig]:
    """
    The standard design: T = (10, 20, 30)·p, a ∈ {1, 0.75, 0.5},
    s = ⌈hp⌉ for h ∈ {0, ¼, ½, ¾, 1}. full=True uses every p up to 300.
    """
    grid: List[DgpConfig] = []
    for p in STANDARD_P if full else p_values:
        for ratio in T_RATIOS:
            for a in A_VALUES:
                for h in S_FRACTIONS:
                    grid.append(DgpConfig(p=p, s=math.ceil(h * p), a=a, T=ratio * p, seed=seed))
    return grid


def _replicate(
    cfg: DgpConfig,
    d: BasisMatrix,
    methods: Sequence[CountMethod],
    seed: int,
    grid_index: int,
    rep: int,
    tables: Optional[LimitLawCatalog],
    eta: float,
) -> Optional[List[int]]:
    """Trend counts for one replication, or None on a numerical failure."""
    try:
        panel = simulate_dgp(cfg, rng_for(seed, grid_index, rep))
        lam = cca(panel.values, d).eigenvalues
        return [
            count_trends(lam, method=m, T=cfg.T, K=d.K, tables=tables, eta=eta).s_hat
            for m in methods
        ]
    except (NumericalError, np.linalg.LinAlgError) as e:
        logger.debug(f"[run_grid] point {grid_index} rep {rep} failed: {e}")
        return None


def run_grid(
    grid: Sequence[DgpConfig],
    methods: Sequence[CountMethod | str] = (CountMethod.MAX_GAP,),
    n_reps: int = 1000,
    K: Optional[int] = None,
    seed: int = 0,
    tables: Optional[LimitLawCatalog] = None,
    eta: float = 0.05,
    out_dir: Optional[str | Path] = None,
    max_workers: Optional[int] = None,
    progress: bool = False,
) -> List[ExperimentResult]:
    """
    Run every method on N simulated panels per grid point.

    Replication k of grid point g draws from the substream (seed, g, k), so
    results are reproducible and independent of the worker count. All
    methods see the same panels. With out_dir, each finished grid point is
    appended to results.jsonl.

    Args:
        grid: DGP configurations (their seed field is not used)
        methods: Trend-count methods to evaluate
        n_reps: Replications per grid point
        K: Fixed number of basis functions; default ⌈T^{3/4}⌉
        seed: Base seed
        tables: Limit-law tables, required by sequential methods

    Raises:
        NumericalError: More than 1% of the replications of a grid point failed
    """
    if not grid:
        raise DimensionError("empty Monte Carlo grid")
    methods = [CountMethod(m) for m in methods]
    stream = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        stream = out_dir / "results.jsonl"
        stream.write_text("")

    workers = max_workers or cpu_count() or 1
    results: List[ExperimentResult] = []
    with ThreadPoolExecutor(max_workers=workers) as executor:
        for g, cfg in enumerate(tqdm(grid, desc="grid", disable=not progress)):
            d = cached_design(K or default_K(cfg.T), cfg.T)
            counts = list(
                executor.map(
                    lambda rep: _replicate(cfg, d, methods, seed, g, rep, tables, eta),
                    range(n_reps),
                )
            )
            ok = np.array([c for c in counts if c is not None], dtype=int).reshape(-1, len(methods))
            n_failed = n_reps - ok.shape[0]
            if n_failed > FAILURE_LIMIT * n_reps:
                raise NumericalError(
                    f"{n_failed} of {n_reps} replications failed at p={cfg.p}, s={cfg.s}, a={cfg.a}, T={cfg.T}"
                )
            if n_failed:
                logger.warning(f"{n_failed} replications failed at grid point {g} and were dropped")

            for k, method in enumerate(methods):
                s_hat = ok[:, k]
                result = ExperimentResult(
                    p=cfg.p,
                    s=cfg.s,
                    a=cfg.a,
                    T=cfg.T,
                    K=d.K,
                    method=method,
                    n_reps=s_hat.size,
                    n_failed=n_failed,
                    freq_correct=float(np.mean(s_hat == cfg.s)) if s_hat.size else 0.0,
                    mae=float(np.mean(np.abs(s_hat - cfg.s))) if s_hat.size else 0.0,
                )
                results.append(result)
                if stream is not None:
                    with stream.open("a") as f:
                        f.write(json.dumps(result.model_dump(mode="json"), sort_keys=True) + "\n")
            logger.info(
                f"p={cfg.p} s={cfg.s} a={cfg.a} T={cfg.T} K={d.K}: "
                + ", ".join(f"{r.method}={r.freq_correct:.3f}" for r in results[-len(methods):])
            )
    return results


def eigenvalue_bands(
    cfg: DgpConfig,
    n_reps: int = 200,
    quantiles: Sequence[float] = (0.025, 0.5, 0.975),
    K: Optional[int] = None,
    seed: int = 0,
    max_workers: Optional[int] = None,
) -> pd.DataFrame:
    """
    Quantiles of λ_i across replications, one row per index i = 1..p.

    Shows the spectrum approaching 1 for i ≤ s and 0 for i > s as T grows.
    """
    d = cached_design(K or default_K(cfg.T), cfg.T)

    def spectrum(rep: int) -> Optional[np.ndarray]:
        try:
            return np.asarray(cca(simulate_dgp(cfg, rng_for(seed, rep)).values, d).eigenvalues)
        except AnalysisError:
            return None

    with ThreadPoolExecutor(max_workers=max_workers or cpu_count() or 1) as executor:
        spectra = [lam for lam in executor.map(spectrum, range(n_reps)) if lam is not None]
    if not spectra:
        raise NumericalError("every replication failed")

    sample = np.vstack(spectra)
    bands: Dict[str, np.ndarray] = {f"q{q:g}": np.quantile(sample, q, axis=0) for q in quantiles}
    frame = pd.DataFrame(bands, index=pd.RangeIndex(1, cfg.p + 1, name="i"))
    frame.attrs["K"] = d.K
    frame.attrs["n_reps"] = len(spectra)
    return frame


def grid_key(result: ExperimentResult) -> Tuple:
    return (result.p, result.s, result.a, result.T, result.K, result.method)
