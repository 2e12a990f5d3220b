import numpy as np
import pytest

from cctrends.cache.table_cache import table_memory
from cctrends.config import CACHE_ENV_VAR
from cctrends.limitlaw.simulate import DEFAULT_ETAS, build_table
from cctrends.mc.dgp import simulate_dgp
from cctrends.models.types import DgpConfig, LimitLawCatalog, LimitLawTable
from cctrends.panel.ingest import write_csv


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    """Keep every test away from ~/.cctrends and from tables cached by other tests."""
    monkeypatch.setenv(CACHE_ENV_VAR, str(tmp_path / "table-cache"))
    table_memory.clear()
    yield
    table_memory.clear()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_tables() -> LimitLawCatalog:
    """Coarse limit-law tables for s = 1..4, enough for logic tests."""
    return build_table(4, DEFAULT_ETAS, n_steps=200, n_reps=2000, seed=7)


def flat_table(s: int, crit: float, eta: float = 0.05) -> LimitLawTable:
    """Table whose trace and max quantiles all equal crit."""
    return LimitLawTable(
        s=s,
        n_reps=1,
        n_steps=1,
        seed=0,
        quantiles_trace={eta: crit},
        quantiles_max={eta: crit},
        mean_log=np.zeros(s),
        median_log=np.zeros(s),
        stripe_delta={eta: 1.0},
    )


def flat_catalog(p: int, crit: float, eta: float = 0.05) -> LimitLawCatalog:
    return LimitLawCatalog(tables={s: flat_table(s, crit, eta) for s in range(1, p + 1)})


@pytest.fixture
def one_trend_panel():
    """p=3 with a single random walk in the last column."""
    return simulate_dgp(DgpConfig(p=3, s=1, a=1.0, T=300, seed=3))


@pytest.fixture
def panel_csv(tmp_path, one_trend_panel):
    return write_csv(one_trend_panel, tmp_path / "panel.csv")


@pytest.fixture
def make_catalog():
    return flat_catalog
