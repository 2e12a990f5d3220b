import json

import numpy as np
import pytest

from cctrends.basis.design import build_design, default_K
from cctrends.cca.core import cca
from cctrends.errors import DimensionError, InputError
from cctrends.limitlaw.simulate import build_table
from cctrends.mc.dgp import rng_for, simulate_dgp
from cctrends.mc.harness import eigenvalue_bands, paper_grid, run_grid
from cctrends.mc.tables import emit_tables, pool_results, shape_tables
from cctrends.models.types import DgpConfig, ExperimentResult


class TestDgp:
    def test_stationary_white_noise(self):
        cfg = DgpConfig(p=3, s=0, a=1.0, T=50, seed=4)
        eps = rng_for(4).standard_normal((50, 3))
        np.testing.assert_array_equal(simulate_dgp(cfg).values, eps)

    def test_all_random_walks(self):
        cfg = DgpConfig(p=2, s=2, a=0.5, T=50, seed=4)
        eps = rng_for(4).standard_normal((50, 2))
        np.testing.assert_allclose(simulate_dgp(cfg).values, np.cumsum(eps, axis=0))

    def test_autoregressive_part(self):
        cfg = DgpConfig(p=2, s=1, a=0.25, T=30, seed=6)
        eps = rng_for(6).standard_normal((30, 2))
        x = simulate_dgp(cfg)
        expected = np.zeros(30)
        prev = 0.0
        for t in range(30):
            prev = 0.75 * prev + eps[t, 0]
            expected[t] = prev
        np.testing.assert_allclose(x.values[:, 0], expected)
        np.testing.assert_allclose(x.values[:, 1], np.cumsum(eps[:, 1]))
        np.testing.assert_array_equal(x.x0(), [0.0, 0.0])

    def test_s_above_p(self):
        with pytest.raises(DimensionError):
            DgpConfig(p=2, s=3, a=1.0, T=10)


def test_standard_grid():
    grid = paper_grid(p_values=(10,))
    assert len(grid) == 45
    assert sorted({c.s for c in grid}) == [0, 3, 5, 8, 10]
    assert sorted({c.T for c in grid}) == [100, 200, 300]
    assert len(paper_grid(full=True)) == 6 * 45


class TestRunGrid:
    grid = [DgpConfig(p=2, s=1, a=1.0, T=200)]

    def test_results_and_stream(self, tmp_path):
        results = run_grid(self.grid, ["max-gap", "f1"], n_reps=20, seed=1, out_dir=tmp_path)
        assert [r.method for r in results] == ["max-gap", "f1"]
        assert all(r.n_reps == 20 and 0 <= r.freq_correct <= 1 for r in results)
        lines = (tmp_path / "results.jsonl").read_text().splitlines()
        assert [json.loads(line)["method"] for line in lines] == ["max-gap", "f1"]

    def test_independent_of_worker_count(self):
        a = run_grid(self.grid, ["max-gap"], n_reps=15, seed=2, max_workers=1)
        b = run_grid(self.grid, ["max-gap"], n_reps=15, seed=2, max_workers=4)
        assert a == b

    def test_empty_grid(self):
        with pytest.raises(DimensionError):
            run_grid([], n_reps=1)

    def test_sequential_methods(self, make_catalog):
        results = run_grid(self.grid, ["seq-Finf"], n_reps=5, tables=make_catalog(2, 1e6))
        assert results[0].freq_correct == 0.0
        assert results[0].mae == 1.0


def test_eigenvalue_bands():
    frame = eigenvalue_bands(DgpConfig(p=3, s=1, a=1.0, T=200), n_reps=20, seed=3)
    assert list(frame.columns) == ["q0.025", "q0.5", "q0.975"]
    assert list(frame.index) == [1, 2, 3]
    assert np.all(frame["q0.025"] <= frame["q0.975"])


def result(n, freq, mae=0.0, method="max-gap", p=10, T=100):
    return ExperimentResult(p=p, s=3, a=1.0, T=T, K=32, method=method, n_reps=n, freq_correct=freq, mae=mae)


class TestTables:
    def test_pooling(self):
        pooled = pool_results([result(10, 0.5, 1.0), result(30, 1.0, 0.0)])
        assert len(pooled) == 1
        assert pooled[0].n_reps == 40
        assert pooled[0].freq_correct == pytest.approx(0.875)
        assert pooled[0].mae == pytest.approx(0.25)
        assert pooled[0].mc_se == pytest.approx(np.sqrt(0.875 * 0.125 / 40))

    def test_empty(self, tmp_path):
        with pytest.raises(InputError):
            emit_tables([], tmp_path)

    def test_shape(self):
        tables = shape_tables([result(10, 0.9), result(10, 0.7, method="f1"), result(10, 0.8, T=200)])
        freq = tables["freq"]
        assert list(freq.index) == [(10, 10), (10, 20)]
        assert list(freq.columns) == ["f1|a=1|s=3", "max-gap|a=1|s=3"]
        assert freq.loc[(10, 10), "max-gap|a=1|s=3"] == pytest.approx(0.9)

    def test_emit(self, tmp_path):
        paths = emit_tables([result(10, 0.9), result(10, 0.7, method="f1")], tmp_path)
        assert sorted(p.name for p in paths) == ["freq.csv", "freq_se.csv", "mae.csv", "results.csv", "results.json"]
        body = json.loads((tmp_path / "results.json").read_text())
        assert {row["method"] for row in body} == {"f1", "max-gap"}


# Max-gap frequency of correct selection and MAE of the standard design at
# p ∈ {10, 20}. Keys are (p, T/p); each row runs over s = 0, ⌈p/4⌉, ⌈p/2⌉,
# ⌈3p/4⌉, p with a = 1, 0.75, 0.5 inside each s block.
MAX_GAP_FREQ = {
    (10, 10): [1, 0.96, 0, 1, 0.81, 0, 0.99, 0.6, 0, 0.93, 0.35, 0.01, 1, 1, 1],
    (10, 20): [1, 1, 0.01, 1, 1, 0.01, 1, 0.98, 0, 1, 0.85, 0.01, 1, 1, 1],
    (10, 30): [1, 1, 0.06, 1, 1, 0.03, 1, 1, 0.02, 1, 0.99, 0.02, 1, 1, 1],
    (20, 10): [1, 1, 0.17, 1, 1, 0.02, 1, 0.9, 0, 0.99, 0.55, 0, 1, 1, 1],
    (20, 20): [1, 1, 0.65, 1, 1, 0.21, 1, 1, 0.03, 1, 1, 0, 1, 1, 1],
    (20, 30): [1, 1, 0.98, 1, 1, 0.74, 1, 1, 0.28, 1, 1, 0.07, 1, 1, 1],
}
MAX_GAP_MAE = {
    (10, 10): [0, 0.36, 9.94, 0, 1.29, 6.95, 0.01, 1.89, 4.96, 0.11, 1.25, 1.96, 0, 0, 0],
    (10, 20): [0, 0, 9.86, 0, 0.02, 6.95, 0, 0.08, 4.98, 0, 0.3, 1.99, 0, 0, 0],
    (10, 30): [0, 0, 9.4, 0, 0, 6.76, 0, 0, 4.92, 0, 0.01, 1.97, 0, 0, 0],
    (20, 10): [0, 0, 16.59, 0, 0.03, 14.66, 0, 0.81, 9.97, 0.02, 2.11, 4.99, 0, 0, 0],
    (20, 20): [0, 0, 7.06, 0, 0, 11.85, 0, 0, 9.72, 0, 0.01, 4.98, 0, 0, 0],
    (20, 30): [0, 0, 0.46, 0, 0, 3.88, 0, 0, 7.21, 0, 0, 4.63, 0, 0, 0],
}


def reference(table, r):
    p = r.p
    s_values = [0, -(-p // 4), -(-p // 2), -(-3 * p // 4), p]
    column = 3 * s_values.index(r.s) + [1.0, 0.75, 0.5].index(r.a)
    return table[(p, r.T // p)][column]


@pytest.fixture(scope="module")
def standard_design():
    return run_grid(paper_grid(), ["max-gap"], n_reps=1000, seed=2024)


@pytest.mark.slow
def test_max_gap_frequencies(standard_design):
    misses = [
        (r.p, r.T, r.a, r.s, r.freq_correct)
        for r in standard_design
        if abs(r.freq_correct - reference(MAX_GAP_FREQ, r)) > max(0.04, 3 * r.mc_se)
    ]
    assert len(standard_design) == 90
    assert misses == []


@pytest.mark.slow
def test_max_gap_mae(standard_design):
    misses = [
        (r.p, r.T, r.a, r.s, r.mae)
        for r in standard_design
        if abs(r.mae - reference(MAX_GAP_MAE, r)) > 0.6
    ]
    assert misses == []


@pytest.fixture(scope="module")
def sequential_tables():
    return build_table(10, (0.05,), n_steps=1000, n_reps=20000, seed=31)


@pytest.mark.slow
@pytest.mark.parametrize("method", ["seq-F1", "seq-Finf"])
def test_sequential_tests_select_true_s(sequential_tables, method):
    grid = [DgpConfig(p=10, s=s, a=1.0, T=300) for s in (3, 5, 8, 10)]
    results = run_grid(grid, [method], n_reps=1000, seed=17, tables=sequential_tables, eta=0.05)
    for r in results:
        assert 0.93 <= r.freq_correct <= 0.99, (r.s, r.freq_correct)


@pytest.mark.slow
def test_eigenvalues_split_at_s():
    medians = [
        eigenvalue_bands(DgpConfig(p=10, s=5, a=1.0, T=T), n_reps=200, quantiles=(0.5,), seed=5)["q0.5"]
        for T in (300, 1000, 3000)
    ]
    trend = [m.loc[5] for m in medians]
    noise = [m.loc[6] for m in medians]
    assert trend[0] < trend[1] < trend[2]
    assert noise[0] > noise[1] > noise[2]


@pytest.mark.slow
def test_random_walks_have_eigenvalues_near_one():
    cfg = DgpConfig(p=10, s=10, a=1.0, T=3000)
    d = build_design(default_K(3000), 3000)
    smallest = [cca(simulate_dgp(cfg, rng_for(12, rep)).values, d).eigenvalues[-1] for rep in range(200)]
    assert np.mean(np.asarray(smallest) > 0.9) >= 0.95
