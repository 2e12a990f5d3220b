"""Selection matrices H for dimensional-coherence transforms and the index specs that build them."""

from typing import List, Sequence

import numpy as np

from cctrends.errors import DimensionError, ParseError
from cctrends.models.types import SelectionMatrix


def parse_index_spec(spec: str, p: int) -> List[int]:
    """
    Parse a 1-based column spec such as "1-11,14" into 0-based indices.

    Ranges are inclusive. Order is preserved and duplicates are rejected.
    """
    if not spec or not spec.strip():
        raise ParseError("empty column spec")
    indices: List[int] = []
    for part in spec.split(","):
        part = part.strip()
        try:
            if "-" in part:
                lo_s, hi_s = part.split("-", 1)
                lo, hi = int(lo_s), int(hi_s)
                if lo > hi:
                    raise ParseError(f"descending range '{part}' in column spec '{spec}'")
                indices.extend(range(lo, hi + 1))
            else:
                indices.append(int(part))
        except ValueError:
            raise ParseError(f"cannot parse '{part}' in column spec '{spec}'")
    for i in indices:
        if i < 1 or i > p:
            raise DimensionError(f"column {i} outside 1..{p} in spec '{spec}'")
    if len(set(indices)) != len(indices):
        raise ParseError(f"duplicate columns in spec '{spec}'")
    return [i - 1 for i in indices]


def parse_group_spec(spec: str, p: int) -> List[List[int]]:
    """Parse groups separated by ';', e.g. "1-3;4-6", each group an index spec."""
    groups = [parse_index_spec(g, p) for g in spec.split(";") if g.strip()]
    if not groups:
        raise ParseError(f"empty group spec '{spec}'")
    return groups


def subset_selection(p: int, indices: Sequence[int]) -> SelectionMatrix:
    """H with unit columns e_i, i in indices (0-based)."""
    H = np.zeros((p, len(indices)))
    for j, i in enumerate(indices):
        H[i, j] = 1.0
    return SelectionMatrix(H=H, kind="subset")


def group_aggregation(p: int, groups: Sequence[Sequence[int]], mean: bool = True) -> SelectionMatrix:
    """One column per group, summing (or averaging) its members."""
    H = np.zeros((p, len(groups)))
    for j, group in enumerate(groups):
        if not group:
            raise DimensionError(f"group {j + 1} is empty")
        H[list(group), j] = 1.0 / len(group) if mean else 1.0
    return SelectionMatrix(H=H, kind="aggregate")


def block_aggregation(q: int, n: int) -> SelectionMatrix:
    """H = I_q ⊗ ι_n: sums of q consecutive blocks of n series."""
    if q < 1 or n < 1:
        raise DimensionError(f"block aggregation needs q, n ≥ 1, got q={q}, n={n}")
    return SelectionMatrix(H=np.kron(np.eye(q), np.ones((n, 1))), kind="aggregate")


def cross_section_average(p: int) -> SelectionMatrix:
    """H = ι_p/p."""
    return SelectionMatrix(H=np.full((p, 1), 1.0 / p), kind="aggregate")


def custom_selection(H) -> SelectionMatrix:
    H = np.asarray(H, dtype=float)
    if H.ndim == 1:
        H = H.reshape(-1, 1)
    return SelectionMatrix(H=H, kind="custom")
