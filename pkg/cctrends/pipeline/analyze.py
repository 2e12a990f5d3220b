from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterator, Optional, Sequence
import logging

import numpy as np

from cctrends import __version__
from cctrends.basis.design import build_design, default_K, k_grid
from cctrends.cache.table_cache import TableCache, load_catalog
from cctrends.cca.core import cca
from cctrends.config import Settings
from cctrends.errors import AnalysisError, DimensionError, NumericalError, TableError
from cctrends.limitlaw.simulate import DEFAULT_ETAS, build_table
from cctrends.loadings.estimators import coordinate_pair, icc
from cctrends.loadings.inference import coefficient_pvalues, lrv, wald
from cctrends.models.types import (
    AnalysisConfig,
    AnalysisReport,
    CountMethod,
    IdentificationDecision,
    LimitLawCatalog,
    TimeSeriesPanel,
)
from cctrends.panel.ingest import ingest_csv
from cctrends.panel.selection import group_aggregation, parse_group_spec, parse_index_spec, subset_selection
from cctrends.panel.transform import apply_selection, preprocess, split_initial_row
from cctrends.trends.count import count_trends
from cctrends.trends.identification import identification_check, search_identification
from cctrends.trends.misspec import misspec_diagnostic

logger = logging.getLogger(__name__)

ARGMAX_METHODS = (CountMethod.MAX_GAP, CountMethod.F1, CountMethod.F2, CountMethod.F3)
SEQUENTIAL_METHODS = (CountMethod.SEQ_F1, CountMethod.SEQ_FINF)


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Prefix errors raised inside a pipeline stage with its name."""
    try:
        yield
    except AnalysisError as e:
        raise e.with_stage(name) from e
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"[{name}] linear algebra failed: {e}") from e


def load_panel(
    path: str | Path,
    config: AnalysisConfig,
    select: Optional[str] = None,
    aggregate: Optional[str] = None,
    time_column: Optional[str] = None,
) -> TimeSeriesPanel:
    """
    Ingest, preprocess and optionally subset or aggregate a CSV panel.

    The first row becomes X_0 and the returned sample is rows 1..T.
    """
    with stage("ingest"):
        panel = ingest_csv(path, time_column=time_column)
    with stage("preprocess"):
        panel = preprocess(
            panel,
            log=config.log,
            normalize_start=config.normalize_start,
            init_mode=config.init_mode,
        )
    with stage("select"):
        if select:
            panel = apply_selection(panel, subset_selection(panel.p, parse_index_spec(select, panel.p)))
        if aggregate:
            panel = apply_selection(panel, group_aggregation(panel.p, parse_group_spec(aggregate, panel.p)))
    with stage("sample"):
        panel = split_initial_row(panel)
    return panel


def ensure_tables(
    s_max: int,
    config: AnalysisConfig,
    settings: Optional[Settings] = None,
    tables_path: Optional[str | Path] = None,
    no_simulate: bool = False,
    progress: bool = False,
) -> LimitLawCatalog:
    """
    Limit-law tables for s = 1..s_max.

    Read from tables_path when given; otherwise taken from the cache and
    simulated where missing, unless no_simulate is set.

    Raises:
        TableError: Tables missing and simulation disabled
    """
    if tables_path is not None:
        return load_catalog(tables_path)

    settings = settings or Settings()
    cache = TableCache(settings.cache_dir)
    n_steps, n_reps, seed = config.table_steps, config.table_reps, config.seed
    if no_simulate:
        missing = [s for s in range(1, s_max + 1) if cache.get(s, n_steps, n_reps, seed) is None]
        if missing:
            raise TableError(
                f"no cached critical values for s={missing} "
                f"(steps={n_steps}, reps={n_reps}, seed={seed}) in {settings.cache_dir}; "
                "run `cctrends critval` or drop --no-simulate"
            )
    etas = sorted(set(DEFAULT_ETAS) | {config.eta})
    return build_table(s_max, etas, n_steps, n_reps, seed, cache=cache, progress=progress)


def count_all(
    lam,
    T: int,
    K: int,
    tables: Optional[LimitLawCatalog],
    config: AnalysisConfig,
    methods: Sequence[CountMethod] = ARGMAX_METHODS + SEQUENTIAL_METHODS,
) -> Dict[str, object]:
    """Every applicable trend-count method; methods whose index set is empty are skipped."""
    counts = {}
    for method in methods:
        if method in SEQUENTIAL_METHODS and tables is None:
            continue
        try:
            counts[method.value] = count_trends(
                lam,
                method=method,
                T=T,
                K=K,
                tables=tables,
                eta=config.eta,
                include_zero=config.include_zero,
            )
        except TableError:
            raise
        except AnalysisError as e:
            logger.info(f"Skipping {method.value}: {e.detail}")
    return counts


def analyze(
    path: str | Path,
    config: AnalysisConfig,
    select: Optional[str] = None,
    aggregate: Optional[str] = None,
    time_column: Optional[str] = None,
    **kwargs,
) -> AnalysisReport:
    """
    Full workflow: ingest → preprocess → select → CCA → counts →
    identification → ICC loadings → LRV and Wald → misspecification.

    Every error is re-raised with the name of the stage it came from.
    """
    return analyze_panel(load_panel(path, config, select, aggregate, time_column), config, **kwargs)


def analyze_panel(
    panel: TimeSeriesPanel,
    config: AnalysisConfig,
    tables_path: Optional[str | Path] = None,
    no_simulate: bool = False,
    settings: Optional[Settings] = None,
    R=None,
    h=None,
    progress: bool = False,
) -> AnalysisReport:
    """Analysis of a prepared panel; see analyze."""
    T, p = panel.T, panel.p
    K = config.K or default_K(T)

    with stage("basis"):
        d = build_design(K, T)
    with stage("cca"):
        result = cca(panel.values, d)
    lam = np.asarray(result.eigenvalues)

    with stage("tables"):
        tables = ensure_tables(p, config, settings, tables_path, no_simulate, progress)
    with stage("count"):
        counts = count_all(lam, T, K, tables, config)
        if config.s is not None:
            if config.s > p:
                raise DimensionError(f"s={config.s} exceeds p={p}")
            s = config.s
        elif config.count_method in counts:
            s = counts[config.count_method].s_hat
        else:
            s = counts[CountMethod.MAX_GAP.value].s_hat
    logger.info(f"T={T}, p={p}, K={K}: s={s} stochastic trends")

    identification: Optional[IdentificationDecision] = None
    loadings = lrv_est = coefficients = wald_result = None
    if 0 < s < p:
        with stage("identification"):
            if config.c_columns is not None:
                pair = coordinate_pair(p, c_columns=config.c_columns)
                identification = identification_check(panel, pair.b, d, config.count_method, s_full=s, tables=tables, eta=config.eta)
                if not identification.accept:
                    logger.warning("b = c⊥ fails the identification check; estimates may be unreliable")
            else:
                identification = search_identification(
                    panel, d, s, config.count_method, preferred=config.b_columns, tables=tables, eta=config.eta
                )
                pair = coordinate_pair(p, b_columns=identification.b_columns)
        with stage("loadings"):
            loadings = icc(panel, d, s, pair, tol=config.tol, max_iter=config.max_iter)
        with stage("inference"):
            lrv_est = lrv(panel, d, loadings.psi_hat, loadings.beta_hat, T, K)
            coefficients = coefficient_pvalues(loadings, lrv_est, panel, T)
            if R is not None and h is not None:
                wald_result = wald(loadings, lrv_est, panel, R, h, T)

    misspec = None
    if s >= 1:
        with stage("misspec"):
            misspec = misspec_diagnostic(
                panel,
                s,
                k_grid(K, config.k_grid_j, config.k_grid_m),
                config.norm,
                tables.table(s),
                config.eta,
                config.location,
            )

    return AnalysisReport(
        tool_version=__version__,
        generated_at=datetime.now(timezone.utc),
        seed=config.seed,
        provenance=panel.provenance,
        labels=panel.labels,
        T=T,
        p=p,
        K=K,
        eigenvalues=lam,
        counts=counts,
        s_used=s,
        identification=identification,
        loadings=loadings,
        lrv=lrv_est,
        coefficients=coefficients,
        wald=wald_result,
        misspec=misspec,
        table_digest=tables.digest(),
        config=config,
    )
