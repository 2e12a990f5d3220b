import numpy as np
import pytest

from cctrends.errors import DimensionError, InputError, MissingValueError, ParseError
from cctrends.loadings.estimators import first_difference, panel_data
from cctrends.models.types import AnalysisConfig, InitMode, TimeSeriesPanel
from cctrends.panel.ingest import ingest_csv, write_csv
from cctrends.panel.selection import (
    block_aggregation,
    cross_section_average,
    custom_selection,
    group_aggregation,
    parse_group_spec,
    parse_index_spec,
    subset_selection,
)
from cctrends.panel.transform import apply_selection, preprocess, split_initial_row
from cctrends.pipeline.analyze import load_panel


def write(tmp_path, text, name="panel.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def column_panel(values, labels=None):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values.reshape(-1, 1)
    return TimeSeriesPanel(values=values, labels=labels or [f"x{i + 1}" for i in range(values.shape[1])])


class TestIngest:
    def test_small_panel(self, tmp_path):
        panel = ingest_csv(write(tmp_path, "a,b\n1,2\n3,4\n5,6\n"))
        assert panel.T == 3
        assert panel.p == 2
        assert panel.labels == ["a", "b"]
        np.testing.assert_array_equal(panel.values, [[1, 2], [3, 4], [5, 6]])
        assert panel.t0_row is None

    def test_empty_cell_names_location(self, tmp_path):
        with pytest.raises(MissingValueError) as err:
            ingest_csv(write(tmp_path, "a,b\n1,2\n,4\n5,6\n"))
        assert "line 3" in err.value.detail
        assert "'a'" in err.value.detail
        assert err.value.exit_code == 2

    def test_non_numeric_cell(self, tmp_path):
        with pytest.raises(ParseError) as err:
            ingest_csv(write(tmp_path, "a,b\n1,2\n3,x\n"))
        assert "'b'" in err.value.detail

    def test_infinite_cell(self, tmp_path):
        with pytest.raises(ParseError):
            ingest_csv(write(tmp_path, "a\n1\ninf\n"))

    def test_single_row(self, tmp_path):
        with pytest.raises(DimensionError):
            ingest_csv(write(tmp_path, "a,b\n1,2\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            ingest_csv(tmp_path / "nope.csv")

    def test_time_column_dropped(self, tmp_path):
        panel = ingest_csv(write(tmp_path, "date,a\n2020-01,1.5\n2020-02,2.5\n"), time_column="date")
        assert panel.labels == ["a"]
        np.testing.assert_array_equal(panel.values[:, 0], [1.5, 2.5])

    def test_column_subset(self, tmp_path):
        panel = ingest_csv(write(tmp_path, "a,b,c\n1,2,3\n4,5,6\n"), columns=["c", "a"])
        assert panel.labels == ["c", "a"]
        np.testing.assert_array_equal(panel.values, [[3, 1], [6, 4]])

    def test_written_panel_reads_back(self, tmp_path, one_trend_panel):
        path = write_csv(one_trend_panel, tmp_path / "out.csv")
        panel = ingest_csv(path)
        assert panel.labels == one_trend_panel.labels
        assert panel.T == one_trend_panel.T + 1
        np.testing.assert_array_equal(panel.values[0], one_trend_panel.x0())
        np.testing.assert_allclose(panel.values[1:], one_trend_panel.values, rtol=0, atol=1e-14)


class TestPreprocess:
    def test_log(self):
        out = preprocess(column_panel([1.0, np.e, np.e**2]), log=True)
        np.testing.assert_allclose(out.values[:, 0], [0.0, 1.0, 2.0], atol=1e-14)
        assert out.provenance.log

    def test_normalize_start(self):
        out = preprocess(column_panel([5.0, 7.0, 9.0]), normalize_start=True)
        np.testing.assert_array_equal(out.values[:, 0], [0.0, 2.0, 4.0])

    def test_levels_is_identity(self):
        panel = column_panel([[1.0, 2.0], [3.0, 5.0], [4.0, 4.0]])
        out = preprocess(panel, init_mode=InitMode.LEVELS)
        np.testing.assert_array_equal(out.values, panel.values)
        np.testing.assert_array_equal(out.t0_row, [1.0, 2.0])

    def test_difference_from_start(self):
        out = preprocess(column_panel([[1.0, 2.0], [3.0, 5.0]]), init_mode="difference-from-start")
        np.testing.assert_array_equal(out.values, [[0.0, 0.0], [2.0, 3.0]])
        np.testing.assert_array_equal(out.x0(), [0.0, 0.0])

    def test_log_of_non_positive(self):
        with pytest.raises(InputError) as err:
            preprocess(column_panel([1.0, 0.0, 2.0]), log=True)
        assert "row 2" in err.value.detail

    def test_order_and_provenance(self):
        out = preprocess(column_panel([np.e, np.e**3]), log=True, normalize_start=True)
        np.testing.assert_allclose(out.values[:, 0], [0.0, 2.0], atol=1e-14)
        assert out.provenance.steps == ["log", "normalize_start", "init_mode=levels"]


class TestSelection:
    def test_parse_index_spec(self):
        assert parse_index_spec("1-3,5", 5) == [0, 1, 2, 4]
        assert parse_index_spec(" 4 , 2 ", 5) == [3, 1]

    @pytest.mark.parametrize("spec", ["", "1-x", "3-1", "1,1"])
    def test_bad_index_spec(self, spec):
        with pytest.raises(ParseError):
            parse_index_spec(spec, 5)

    def test_index_out_of_range(self):
        with pytest.raises(DimensionError):
            parse_index_spec("1-6", 5)

    def test_parse_group_spec(self):
        assert parse_group_spec("1-2;3", 3) == [[0, 1], [2]]

    def test_subset(self):
        panel = column_panel(np.arange(12.0).reshape(4, 3), ["a", "b", "c"])
        out = apply_selection(panel, subset_selection(3, [0, 1]))
        np.testing.assert_array_equal(out.values, panel.values[:, :2])
        assert out.labels == ["a", "b"]
        assert out.provenance.selection_kind == "subset"

    def test_cross_section_average(self):
        panel = column_panel(np.arange(12.0).reshape(4, 3), ["a", "b", "c"])
        out = apply_selection(panel, cross_section_average(3))
        np.testing.assert_allclose(out.values[:, 0], panel.values.mean(axis=1))
        assert out.labels == ["a+b+c"]

    def test_identity(self):
        panel = column_panel(np.arange(12.0).reshape(4, 3))
        out = apply_selection(panel, custom_selection(np.eye(3)))
        np.testing.assert_array_equal(out.values, panel.values)
        assert out.labels == ["h1", "h2", "h3"]

    def test_group_sums(self):
        H = group_aggregation(4, [[0, 1], [2, 3]], mean=False)
        np.testing.assert_array_equal(H.H, [[1, 0], [1, 0], [0, 1], [0, 1]])

    def test_block_aggregation(self):
        H = block_aggregation(2, 3)
        assert H.H.shape == (6, 2)
        np.testing.assert_array_equal(H.H.sum(axis=0), [3, 3])

    def test_rank_deficient(self):
        with pytest.raises(DimensionError):
            custom_selection([[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]])

    def test_dimension_mismatch(self):
        panel = column_panel(np.arange(12.0).reshape(4, 3))
        with pytest.raises(DimensionError):
            apply_selection(panel, cross_section_average(4))

    def test_selections_compose(self):
        panel = column_panel(np.arange(16.0).reshape(4, 4))
        out = apply_selection(apply_selection(panel, subset_selection(4, [0, 1, 2])), cross_section_average(3))
        np.testing.assert_allclose(np.asarray(out.provenance.selection)[:, 0], [1 / 3, 1 / 3, 1 / 3, 0])
        np.testing.assert_allclose(out.values[:, 0], panel.values[:, :3].mean(axis=1))

    def test_x0_follows_selection(self):
        panel = TimeSeriesPanel(values=np.ones((3, 2)), labels=["a", "b"], t0_row=[2.0, 4.0])
        out = apply_selection(panel, cross_section_average(2))
        np.testing.assert_allclose(out.x0(), [3.0])


class TestInitialRow:
    def test_levels_sample_excludes_x0(self, tmp_path):
        path = write(tmp_path, "a,b\n1,2\n3,5\n4,4\n6,9\n")
        panel = load_panel(path, AnalysisConfig(init_mode="levels"))
        assert panel.T == 3
        assert panel.provenance.raw_rows == 4
        np.testing.assert_array_equal(panel.x0(), [1.0, 2.0])
        np.testing.assert_array_equal(panel.values, [[3, 5], [4, 4], [6, 9]])
        dx = first_difference(*panel_data(panel))
        np.testing.assert_array_equal(dx[0], [2.0, 3.0])

    def test_difference_sample_excludes_zero_row(self, tmp_path):
        path = write(tmp_path, "a,b\n1,2\n3,5\n4,4\n6,9\n")
        panel = load_panel(path, AnalysisConfig(init_mode="difference-from-start"))
        assert panel.T == 3
        np.testing.assert_array_equal(panel.x0(), [0.0, 0.0])
        np.testing.assert_array_equal(panel.values, [[2, 3], [3, 2], [5, 7]])

    def test_simulated_panel_reads_back_unchanged(self, tmp_path, one_trend_panel):
        path = write_csv(one_trend_panel, tmp_path / "sim.csv")
        panel = load_panel(path, AnalysisConfig())
        assert panel.T == one_trend_panel.T
        np.testing.assert_allclose(panel.values, one_trend_panel.values, rtol=0, atol=1e-14)

    def test_too_few_rows(self):
        with pytest.raises(DimensionError):
            split_initial_row(column_panel([1.0, 2.0]))
