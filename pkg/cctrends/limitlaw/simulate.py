"""Monte Carlo simulation of ζ^(s), the ordered eigenvalues of (∫B₁B₁′)⁻¹."""

from concurrent.futures import ThreadPoolExecutor
from os import cpu_count
from typing import Iterable, Optional, Sequence, Tuple
import logging

import numpy as np
from tqdm import tqdm

from cctrends.cache.table_cache import TableCache
from cctrends.errors import DimensionError, InputError, NumericalError, TableError
from cctrends.models.types import LimitLawCatalog, LimitLawTable, Location

logger = logging.getLogger(__name__)

DEFAULT_STEPS = 10_000
DEFAULT_REPS = 100_000
DEFAULT_ETAS = (0.01, 0.05, 0.10)
SINGULAR_EIG = 1e-12
MAX_ATTEMPTS = 20
CHUNK = 512


def _substream(seed: int, s: int, rep: int, attempt: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(s, rep, attempt))))


def _one_zeta(s: int, n_steps: int, seed: int, rep: int) -> Tuple[np.ndarray, int]:
    """ζ for one replication and the number of redraws it needed."""
    for attempt in range(MAX_ATTEMPTS):
        rng = _substream(seed, s, rep, attempt)
        # B(t/n) = n^{-1/2} Σ_{i≤t} ξ_i, right-endpoint Riemann sum of BB′
        B = np.cumsum(rng.standard_normal((n_steps, s)), axis=0) / np.sqrt(n_steps)
        G = B.T @ B / n_steps
        eig = np.linalg.eigvalsh(G)
        if eig[0] >= SINGULAR_EIG:
            return 1.0 / eig, attempt
    raise NumericalError(f"replication {rep} of ζ^({s}) stayed singular after {MAX_ATTEMPTS} draws")


def simulate_zeta(
    s: int,
    n_steps: int = DEFAULT_STEPS,
    n_reps: int = DEFAULT_REPS,
    seed: int = 0,
    max_workers: Optional[int] = None,
    progress: bool = False,
) -> Tuple[np.ndarray, int]:
    """
    Draw n_reps replications of ζ^(s).

    Replication k uses the substream SeedSequence(seed, spawn_key=(s, k, attempt)),
    so results do not depend on the worker count. Draws whose ∫B₁B₁′ has
    smallest eigenvalue below 1e-12 are redrawn with the next attempt.

    Returns:
        (n_reps×s array with rows sorted non-increasing, number of redraws)
    """
    if s < 1:
        raise DimensionError(f"s must be at least 1, got {s}")
    if n_steps < 1 or n_reps < 1:
        raise DimensionError(f"n_steps and n_reps must be positive, got {n_steps}, {n_reps}")
    if n_steps < 1000:
        logger.debug(f"[simulate_zeta] n_steps={n_steps} is below the recommended 1000")

    def run_chunk(start: int) -> Tuple[np.ndarray, int]:
        stop = min(start + CHUNK, n_reps)
        out = np.empty((stop - start, s))
        redrawn = 0
        for k, rep in enumerate(range(start, stop)):
            out[k], attempts = _one_zeta(s, n_steps, seed, rep)
            redrawn += attempts
        return out, redrawn

    starts = range(0, n_reps, CHUNK)
    workers = max_workers or min(cpu_count() or 1, len(starts))
    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(
            tqdm(
                executor.map(run_chunk, starts),
                total=len(starts),
                desc=f"zeta s={s}",
                disable=not progress,
                leave=False,
            )
        )

    zeta = np.concatenate([r[0] for r in results], axis=0)
    redrawn = sum(r[1] for r in results)
    if redrawn:
        logger.info(f"ζ^({s}): {redrawn} near-singular draws redrawn")
    return zeta, redrawn


def table_from_sample(
    zeta: np.ndarray,
    etas: Iterable[float],
    n_steps: int,
    seed: int,
    n_redrawn: int = 0,
) -> LimitLawTable:
    """Quantiles, log-moments and stripe widths of a ζ sample."""
    zeta = np.asarray(zeta, dtype=float)
    etas = sorted(set(float(e) for e in etas))
    if any(not 0 < e < 1 for e in etas):
        raise InputError(f"eta values must lie in (0, 1), got {etas}")

    logs = np.log(zeta)
    mean_log = logs.mean(axis=0)
    median_log = np.median(logs, axis=0)
    dev_mean = np.max(np.abs(logs - mean_log), axis=1)
    dev_median = np.max(np.abs(logs - median_log), axis=1)
    trace = zeta.sum(axis=1)
    top = zeta[:, 0]

    def q(sample: np.ndarray, eta: float) -> float:
        return float(np.quantile(sample, 1.0 - eta))

    return LimitLawTable(
        s=zeta.shape[1],
        n_reps=zeta.shape[0],
        n_steps=n_steps,
        seed=seed,
        quantiles_trace={e: q(trace, e) for e in etas},
        quantiles_max={e: q(top, e) for e in etas},
        mean_log=mean_log,
        median_log=median_log,
        stripe_delta={e: q(dev_mean, e) for e in etas},
        stripe_delta_median={e: q(dev_median, e) for e in etas},
        n_redrawn=n_redrawn,
    )


def build_table(
    s_max: int,
    etas: Sequence[float] = DEFAULT_ETAS,
    n_steps: int = DEFAULT_STEPS,
    n_reps: int = DEFAULT_REPS,
    seed: int = 0,
    cache: Optional[TableCache] = None,
    progress: bool = False,
) -> LimitLawCatalog:
    """
    Tables for s = 1..s_max, read from the cache when present.

    A cached table is reused only when it covers every requested η;
    newly built tables are written back to the cache.
    """
    if s_max < 1:
        raise DimensionError(f"s_max must be at least 1, got {s_max}")
    wanted = set(float(e) for e in etas)

    tables = {}
    for s in range(1, s_max + 1):
        table = cache.get(s, n_steps, n_reps, seed) if cache is not None else None
        if table is not None and wanted <= set(map(float, table.quantiles_trace)):
            tables[s] = table
            continue
        logger.info(f"Simulating ζ^({s}): {n_reps} paths of {n_steps} steps")
        zeta, redrawn = simulate_zeta(s, n_steps, n_reps, seed, progress=progress)
        tables[s] = table_from_sample(zeta, wanted, n_steps, seed, redrawn)
        if cache is not None:
            cache.put(tables[s])
    return LimitLawCatalog(tables=tables)


def stripe_params(
    table: LimitLawTable | LimitLawCatalog,
    s: int,
    eta: float,
    location: Location | str = Location.MEAN,
) -> Tuple[np.ndarray, float]:
    """
    (center, δ) of the confidence stripe for log ζ^(s).

    Raises:
        TableError: s or eta not covered
    """
    if isinstance(table, LimitLawCatalog):
        table = table.table(s)
    elif table.s != s:
        raise TableError(f"table is for s={table.s}, requested s={s}")
    location = Location(location)
    center = table.median_log if location is Location.MEDIAN else table.mean_log
    return np.asarray(center), table.delta(eta, location)
