from typing import Callable, Literal, Optional
import logging
import math

import numpy as np

from cctrends.errors import DimensionError
from cctrends.models.types import BasisMatrix, KGrid

logger = logging.getLogger(__name__)

BasisFunction = Callable[[int, np.ndarray], np.ndarray]


def kl_frequencies(K: int) -> np.ndarray:
    """ν_k = 1/((k − ½)π), k = 1..K, strictly decreasing."""
    if K < 1:
        raise DimensionError(f"K must be at least 1, got {K}")
    k = np.arange(1, K + 1, dtype=float)
    return 1.0 / ((k - 0.5) * np.pi)


def build_design(
    K: int,
    T: int,
    kind: Literal["KL", "custom"] = "KL",
    phi: Optional[BasisFunction] = None,
) -> BasisMatrix:
    """
    Evaluate K basis functions on the grid t/T, t = 1..T.

    For kind="KL", φ_k(u) = √2·sin(u/ν_k). For kind="custom", phi(k, u) is
    called with 1-based k and the grid vector u and must return T values;
    orthonormality is the caller's responsibility (see gram_deviation).

    Args:
        K: Number of basis functions
        T: Sample size
        kind: "KL" or "custom"
        phi: Basis callback, required for kind="custom"

    Returns:
        BasisMatrix of shape T×K
    """
    if K < 1 or T < 1:
        raise DimensionError(f"basis needs K ≥ 1 and T ≥ 1, got K={K}, T={T}")
    if T < K:
        logger.warning(f"T={T} is smaller than K={K}; M_dd will be singular")

    u = np.arange(1, T + 1, dtype=float) / T
    if kind == "KL":
        values = np.sqrt(2.0) * np.sin(np.outer(u, 1.0 / kl_frequencies(K)))
    elif kind == "custom":
        if phi is None:
            raise DimensionError("custom basis requires a callback phi(k, u)")
        columns = []
        for k in range(1, K + 1):
            col = np.asarray(phi(k, u), dtype=float)
            if col.shape != (T,):
                raise DimensionError(f"phi({k}, u) returned shape {col.shape}, expected ({T},)")
            columns.append(col)
        values = np.column_stack(columns)
    else:
        raise DimensionError(f"unknown basis kind '{kind}'")

    return BasisMatrix(values=values, kind=kind, K=K, T=T)


def default_K(T: int) -> int:
    """⌈T^{3/4}⌉, computed exactly in integers."""
    if T < 2:
        raise DimensionError(f"T must be at least 2, got {T}")
    K = math.ceil(T**0.75)
    # Correct floating error at perfect powers such as T = 16
    while (K - 1) ** 4 >= T**3:
        K -= 1
    while K**4 < T**3:
        K += 1
    return K


def k_grid(base_K: int, j: int = 0, m: int = 0) -> KGrid:
    """K_i = K(1 + i·j), i = 0..m."""
    if base_K < 1:
        raise DimensionError(f"base K must be at least 1, got {base_K}")
    if j < 0 or m < 0:
        raise DimensionError(f"grid step j and length m must be non-negative, got j={j}, m={m}")
    return KGrid(base_K=base_K, j=j, m=m)


def gram_deviation(d: BasisMatrix) -> float:
    """‖T⁻¹Σ d_t d_t′ − I_K‖_max, a check on custom bases."""
    D = np.asarray(d.values)
    gram = D.T @ D / d.T
    return float(np.abs(gram - np.eye(d.K)).max())
