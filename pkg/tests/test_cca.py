import numpy as np
import pytest

from cctrends.basis.design import build_design
from cctrends.cca.core import cca, moment, partition
from cctrends.errors import ConditioningError, DimensionError
from cctrends.models.types import BasisMatrix


class TestMoment:
    def test_ones(self):
        np.testing.assert_array_equal(moment(np.ones(4), np.ones(4)), [[1.0]])

    def test_mean(self):
        np.testing.assert_array_equal(moment([1.0, 2.0, 3.0], [1.0, 1.0, 1.0]), [[2.0]])

    def test_matches_double_loop(self, rng):
        a, b = rng.standard_normal((5, 2)), rng.standard_normal((5, 3))
        naive = np.zeros((2, 3))
        for i in range(2):
            for j in range(3):
                naive[i, j] = sum(a[t, i] * b[t, j] for t in range(5)) / 5
        np.testing.assert_allclose(moment(a, b), naive, rtol=0, atol=1e-14)

    def test_row_mismatch(self):
        with pytest.raises(DimensionError):
            moment(np.ones(3), np.ones(4))


class TestCca:
    def test_perfect_correlation(self):
        d = build_design(3, 50)
        result = cca(3 * d.values[:, :1], d)
        assert result.eigenvalues[0] == pytest.approx(1.0, abs=1e-10)

    def test_zero_correlation(self, rng):
        d = build_design(5, 60)
        z = rng.standard_normal(60)
        f = z - d.values @ np.linalg.lstsq(d.values, z, rcond=None)[0]
        assert cca(f, d).eigenvalues[0] == pytest.approx(0.0, abs=1e-10)

    @pytest.mark.parametrize("seed", range(100))
    def test_two_by_two_quadratic(self, seed):
        d = build_design(3, 40)
        f = np.random.default_rng(seed).standard_normal((40, 2))
        Mff = moment(f, f)
        Mfd = moment(f, d.values)
        A = Mfd @ np.linalg.solve(moment(d.values, d.values), Mfd.T)
        # det(λ·Mff − A) = 0 expanded as a quadratic in λ
        coeffs = [
            np.linalg.det(Mff),
            -(Mff[0, 0] * A[1, 1] + Mff[1, 1] * A[0, 0] - 2 * Mff[0, 1] * A[0, 1]),
            np.linalg.det(A),
        ]
        roots = np.sort(np.roots(coeffs).real)[::-1]
        np.testing.assert_allclose(cca(f, d).eigenvalues, roots, atol=1e-10)

    def test_normalization(self, rng):
        d = build_design(12, 100)
        f = np.cumsum(rng.standard_normal((100, 4)), axis=0)
        result = cca(f, d)
        V = result.eigenvectors
        np.testing.assert_allclose(V.T @ moment(f, f) @ V, np.eye(4), atol=1e-9)
        assert np.all(np.diff(result.eigenvalues) <= 0)
        assert np.all((result.eigenvalues >= 0) & (result.eigenvalues <= 1))

    def test_invariant_to_linear_transform(self, rng):
        d = build_design(12, 100)
        f = np.cumsum(rng.standard_normal((100, 3)), axis=0)
        A = np.array([[2.0, 0.5, 0.0], [0.0, -1.0, 0.3], [0.1, 0.0, 4.0]])
        np.testing.assert_allclose(cca(f @ A, d).eigenvalues, cca(f, d).eigenvalues, atol=1e-10)

    def test_invariant_to_basis_rotation(self, rng):
        d = build_design(10, 120)
        O, _ = np.linalg.qr(rng.standard_normal((10, 10)))
        rotated = BasisMatrix(values=d.values @ O, kind="custom", K=10, T=120)
        f = np.cumsum(rng.standard_normal((120, 3)), axis=0)
        np.testing.assert_allclose(cca(f, rotated).eigenvalues, cca(f, d).eigenvalues, rtol=0, atol=1e-10)

    def test_eigenvalues_sum_to_trace(self, rng):
        d = build_design(15, 150)
        f = rng.standard_normal((150, 4)) + np.cumsum(rng.standard_normal((150, 4)), axis=0)
        Mff, Mfd, Mdd = moment(f, f), moment(f, d.values), moment(d.values, d.values)
        trace = np.trace(np.linalg.solve(Mff, Mfd) @ np.linalg.solve(Mdd, Mfd.T))
        result = cca(f, d)
        assert len(result.eigenvalues) == 4
        assert np.sum(result.eigenvalues) == pytest.approx(trace, rel=0, abs=1e-8)

    def test_singular_data(self, rng):
        d = build_design(6, 50)
        x = rng.standard_normal(50)
        with pytest.raises(ConditioningError) as err:
            cca(np.column_stack([x, 2 * x]), d)
        assert "M_ff" in err.value.detail

    def test_singular_basis(self, rng):
        d = build_design(20, 10)
        with pytest.raises(ConditioningError) as err:
            cca(rng.standard_normal((10, 2)), d)
        assert "M_dd" in err.value.detail

    def test_too_few_functions(self, rng):
        with pytest.raises(DimensionError):
            cca(rng.standard_normal((50, 4)), build_design(3, 50))

    def test_row_mismatch(self, rng):
        with pytest.raises(DimensionError):
            cca(rng.standard_normal((49, 2)), build_design(5, 50))


class TestPartition:
    @pytest.fixture
    def result(self, rng):
        d = build_design(8, 80)
        return cca(rng.standard_normal((80, 3)), d)

    def test_all_trends(self, result):
        lam1, lam0, V1, V0 = partition(result, 3)
        assert lam1.shape == (3,) and lam0.shape == (0,)
        assert V1.shape == (3, 3) and V0.shape == (3, 0)

    def test_no_trends(self, result):
        lam1, lam0, V1, V0 = partition(result, 0)
        assert lam1.size == 0 and V1.shape == (3, 0)
        np.testing.assert_array_equal(V0, result.eigenvectors)

    def test_split(self, result):
        _, _, V1, V0 = partition(result, 1)
        np.testing.assert_array_equal(V1[:, 0], result.eigenvectors[:, 0])
        np.testing.assert_array_equal(V0, result.eigenvectors[:, 1:])

    def test_out_of_range(self, result):
        with pytest.raises(DimensionError):
            partition(result, 4)
