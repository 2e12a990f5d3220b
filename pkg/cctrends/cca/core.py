from typing import Tuple
import logging

import numpy as np
from scipy import linalg

from cctrends.errors import ConditioningError, DimensionError
from cctrends.models.types import BasisMatrix, CcaResult, ConditionReport

logger = logging.getLogger(__name__)

# Relative eigenvalue floor below which a moment matrix is treated as singular
SINGULAR_RTOL = 1e-12
CLAMP_WARN = 1e-8


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return a.reshape(-1, 1) if a.ndim == 1 else a


def moment(a, b) -> np.ndarray:
    """M_ab = T⁻¹ Σ_t a_t b_t′ for T×n and T×m inputs."""
    a = _as_matrix(a)
    b = _as_matrix(b)
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"moment needs equal row counts, got {a.shape[0]} and {b.shape[0]}")
    return a.T @ b / a.shape[0]


def check_definite(M: np.ndarray, name: str) -> Tuple[float, float]:
    """
    Smallest and largest eigenvalue of a symmetric moment matrix.

    Raises:
        ConditioningError: If the smallest is not above SINGULAR_RTOL times the largest
    """
    eig = linalg.eigvalsh(M)
    lo, hi = float(eig[0]), float(eig[-1])
    if hi <= 0 or lo <= SINGULAR_RTOL * hi:
        raise ConditioningError(f"{name} is singular: smallest eigenvalue {lo:.3e}, largest {hi:.3e}")
    return lo, hi


def basis_factor(d: BasisMatrix) -> Tuple[Tuple[np.ndarray, bool], float]:
    """Cholesky factor of M_dd, computed once per basis."""
    if d._mdd_factor is None:
        D = np.asarray(d.values)
        Mdd = D.T @ D / d.T
        lo, _ = check_definite(Mdd, "M_dd")
        d._mdd_factor = linalg.cho_factor(Mdd, lower=True)
        d._mdd_min_eig = lo
    return d._mdd_factor, d._mdd_min_eig


def project(Mfd: np.ndarray, d: BasisMatrix) -> np.ndarray:
    """M_fd M_dd⁻¹ M_df through the factorization of M_dd."""
    factor, _ = basis_factor(d)
    A = Mfd @ linalg.cho_solve(factor, Mfd.T)
    return (A + A.T) / 2


def cca(f, d: BasisMatrix) -> CcaResult:
    """
    Solve |λM_ff − M_fd M_dd⁻¹ M_df| = 0.

    M_ff = LL′ is whitened, the symmetric L⁻¹M_fd M_dd⁻¹M_df L⁻ᵀ is
    diagonalized, and V = L⁻ᵀU, so V′M_ffV = I_p. Eigenvalues are sorted
    non-increasing (stable on ties) and clamped into [0, 1].

    Args:
        f: T×p data
        d: T×K basis with K ≥ p

    Returns:
        CcaResult

    Raises:
        DimensionError: Row mismatch or K < p
        ConditioningError: M_ff or M_dd numerically singular
    """
    F = _as_matrix(f)
    T, p = F.shape
    if d.T != T:
        raise DimensionError(f"data has {T} rows, basis has {d.T}")
    if d.K < p:
        raise DimensionError(f"K={d.K} basis functions for p={p} series; K ≥ p is required")

    Mff = moment(F, F)
    mff_lo, mff_hi = check_definite(Mff, "M_ff")
    _, mdd_lo = basis_factor(d)

    A = project(moment(F, d.values), d)
    L = linalg.cholesky(Mff, lower=True)
    W = linalg.solve_triangular(L, A, lower=True)
    C = linalg.solve_triangular(L, W.T, lower=True)
    C = (C + C.T) / 2

    w, U = linalg.eigh(C)
    order = np.argsort(-w, kind="stable")
    w = w[order]
    V = linalg.solve_triangular(L.T, U[:, order], lower=False)

    max_clamp = float(max(0.0, -w.min(), w.max() - 1.0))
    if max_clamp > CLAMP_WARN:
        logger.warning(f"[cca] eigenvalues clamped into [0, 1] by {max_clamp:.3e}; check conditioning")
    lam = np.clip(w, 0.0, 1.0)

    return CcaResult(
        eigenvalues=lam,
        eigenvectors=V,
        condition=ConditionReport(
            mff_min_eig=mff_lo,
            mff_max_eig=mff_hi,
            mdd_min_eig=mdd_lo,
            max_clamp=max_clamp,
            clamp_warning=max_clamp > CLAMP_WARN,
        ),
    )


def partition(result: CcaResult, s: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(Λ₁, Λ₀, V₁, V₀): the s largest eigenpairs and the rest; empty blocks at s = 0 or p."""
    p = result.p
    if not 0 <= s <= p:
        raise DimensionError(f"s={s} outside [0, {p}]")
    lam = np.asarray(result.eigenvalues)
    V = np.asarray(result.eigenvectors)
    return lam[:s], lam[s:], V[:, :s], V[:, s:]
