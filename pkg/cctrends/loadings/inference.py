"""Long-run variance and Wald inference on the unrestricted loadings ψ̂_*."""

import logging

import numpy as np
from scipy import linalg, stats

from cctrends.cca.core import basis_factor, moment
from cctrends.errors import ConditioningError, DimensionError
from cctrends.loadings.estimators import first_difference, panel_data
from cctrends.models.types import (
    BasisMatrix,
    CoefficientTable,
    LoadingEstimate,
    LrvEstimate,
    WaldResult,
)

logger = logging.getLogger(__name__)

RCOND_MIN = 1e-12


def _a_bar(psi: np.ndarray) -> np.ndarray:
    """ā = ψ(ψ′ψ)⁻¹."""
    return linalg.solve(psi.T @ psi, psi.T, assume_a="pos").T


def _check_invertible(M: np.ndarray, name: str):
    if M.size == 0:
        return
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or 1.0 / cond < RCOND_MIN:
        raise ConditioningError(f"{name} is singular (condition number {cond:.3e})")


def lrv(x, d: BasisMatrix, psi_hat, beta_hat, T: int | None = None, K: int | None = None, x0=None) -> LrvEstimate:
    """
    Ω̂ = (T/K)·Z M_dd⁻¹ Z′ with Z = (ā′M_{Δxd}; β̂′M_{xd}).

    The s×s block Ω̂₁₁ belongs to the trend increments, the r×r block Ω̂₂₂
    to the cointegrating relations; Ω̂₂₂.₁ = Ω̂₂₂ − Ω̂₂₁Ω̂₁₁⁻¹Ω̂₁₂.

    Raises:
        ConditioningError: Ω̂₁₁ is singular
    """
    values, start = panel_data(x, x0)
    psi_hat = np.asarray(psi_hat, dtype=float)
    beta_hat = np.asarray(beta_hat, dtype=float)
    T = values.shape[0] if T is None else T
    K = d.K if K is None else K
    s = psi_hat.shape[1]
    if psi_hat.shape[0] != values.shape[1] or beta_hat.shape[0] != values.shape[1]:
        raise DimensionError("ψ̂ and β̂ must have p rows")

    D = np.asarray(d.values)
    blocks = []
    if s:
        blocks.append(_a_bar(psi_hat).T @ moment(first_difference(values, start), D))
    if beta_hat.shape[1]:
        blocks.append(beta_hat.T @ moment(values, D))
    Z = np.vstack(blocks)

    factor, _ = basis_factor(d)
    omega = (T / K) * Z @ linalg.cho_solve(factor, Z.T)
    omega = (omega + omega.T) / 2

    o11, o12 = omega[:s, :s], omega[:s, s:]
    o21, o22 = omega[s:, :s], omega[s:, s:]
    if s and omega.shape[0] > s:
        _check_invertible(o11, "Ω̂₁₁")
        omega_221 = o22 - o21 @ linalg.solve(o11, o12, assume_a="sym")
    else:
        omega_221 = o22
    omega_221 = (omega_221 + omega_221.T) / 2
    return LrvEstimate(omega=omega, s=s, omega_221=omega_221)


def wald_covariance(est: LoadingEstimate, lrv_est: LrvEstimate, x, T: int | None = None) -> np.ndarray:
    """Û = (T⁻¹ā′M_xxā)⁻¹ ⊗ Ω̂₂₂.₁, ordered like the column-major vec of ψ̂_*."""
    values, _ = panel_data(x)
    T = values.shape[0] if T is None else T
    a_bar = _a_bar(np.asarray(est.psi_hat))
    A = a_bar.T @ moment(values, values) @ a_bar / T
    _check_invertible(A, "T⁻¹ā′M_xxā")
    return np.kron(np.linalg.inv(A), np.asarray(lrv_est.omega_221))


def wald(est: LoadingEstimate, lrv_est: LrvEstimate, x, R, h, T: int | None = None) -> WaldResult:
    """
    Wald test of R′vec(ψ_*) = h.

    Q = T²(R′vec(ψ̂_*) − h)′(R′ÛR)⁻¹(R′vec(ψ̂_*) − h) is compared with χ²_m.
    The same statistic is evaluated in dual form from β̂_*′ with −h.

    Raises:
        DimensionError: R is not sr×m of full column rank or h has the wrong length
        ConditioningError: R′ÛR is singular
    """
    values, _ = panel_data(x)
    T = values.shape[0] if T is None else T
    R = np.asarray(R, dtype=float)
    if R.ndim == 1:
        R = R.reshape(-1, 1)
    h = np.asarray(h, dtype=float).ravel()
    sr = est.s * est.r
    if sr == 0:
        raise DimensionError("ψ_* is empty (s = 0 or s = p); there is nothing to test")
    if R.shape[0] != sr:
        raise DimensionError(f"R has {R.shape[0]} rows, vec(ψ_*) has {sr} entries")
    m = R.shape[1]
    if h.shape != (m,):
        raise DimensionError(f"h has {h.size} entries, R has {m} columns")
    if np.linalg.matrix_rank(R) < m:
        raise DimensionError("R is not of full column rank")

    U = wald_covariance(est, lrv_est, values, T)
    middle = R.T @ U @ R
    _check_invertible(middle, "R′ÛR")

    def statistic(diff: np.ndarray) -> float:
        return float(T**2 * diff @ linalg.solve(middle, diff, assume_a="sym"))

    psi_star = np.asarray(est.psi_star)
    beta_star = np.asarray(est.beta_star)
    Q = max(statistic(R.T @ psi_star.ravel(order="F") - h), 0.0)
    Q_dual = max(statistic(R.T @ beta_star.T.ravel(order="F") + h), 0.0)
    p_value = float(stats.chi2.sf(Q, m))
    logger.debug(f"[wald] Q={Q:.6g}, dual={Q_dual:.6g}, m={m}, p={p_value:.4g}")
    return WaldResult(Q=Q, Q_dual=Q_dual, dof=m, p_value=p_value, R=R, h=h)


def coefficient_pvalues(est: LoadingEstimate, lrv_est: LrvEstimate, x, T: int | None = None) -> CoefficientTable:
    """Single-restriction Wald tests ψ_*[i, j] = 0 for every unrestricted coefficient."""
    values, _ = panel_data(x)
    T = values.shape[0] if T is None else T
    psi_star = np.asarray(est.psi_star)
    r, s = psi_star.shape
    if r * s == 0:
        empty = np.zeros((r, s))
        return CoefficientTable(estimate=empty, std_error=empty, wald=empty, p_value=empty)

    U = wald_covariance(est, lrv_est, values, T)
    var = np.diag(U).reshape((r, s), order="F")
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(var > 0, T**2 * psi_star**2 / var, np.inf)
    return CoefficientTable(
        estimate=psi_star,
        std_error=np.sqrt(np.maximum(var, 0.0)) / T,
        wald=q,
        p_value=stats.chi2.sf(q, 1),
    )
