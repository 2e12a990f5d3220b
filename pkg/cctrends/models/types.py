from datetime import datetime
from enum import Enum
from typing import Annotated, Dict, List, Literal, Optional, Tuple
import hashlib
import json
import math

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PlainSerializer,
    PlainValidator,
    PrivateAttr,
    computed_field,
    field_validator,
    model_validator,
)

from cctrends.errors import DimensionError, TableError


def _as_array(value) -> np.ndarray:
    """Copy into a read-only float array."""
    arr = np.array(value, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


Array = Annotated[
    np.ndarray,
    PlainValidator(_as_array),
    PlainSerializer(lambda a: np.asarray(a).tolist(), return_type=list),
]

# Shared by every model below. Arrays are copied and frozen on validation,
# so frozen models are safe to share across threads.
MODEL_CONFIG = ConfigDict(
    populate_by_name=True,
    alias_generator=None,
    use_enum_values=True,
    arbitrary_types_allowed=True,
    frozen=True,
)


class InitMode(str, Enum):
    LEVELS = "levels"
    DIFFERENCE = "difference-from-start"


class Norm(str, Enum):
    ONE = "one"
    INFINITY = "infinity"


class CountMethod(str, Enum):
    MAX_GAP = "max-gap"
    F1 = "f1"
    F2 = "f2"
    F3 = "f3"
    SEQ_F1 = "seq-F1"
    SEQ_FINF = "seq-Finf"


class Location(str, Enum):
    MEAN = "mean"
    MEDIAN = "median"


# ---------------------------------------------------------------------------
# Panels
# ---------------------------------------------------------------------------


class Provenance(BaseModel):
    """Record of the transforms applied to a panel, in order."""
    model_config = MODEL_CONFIG

    source: Optional[str] = None
    log: bool = False
    normalize_start: bool = False
    init_mode: Optional[InitMode] = None
    raw_rows: Optional[int] = None
    selection_kind: Optional[str] = None
    selection: Optional[Array] = None
    steps: List[str] = Field(default_factory=list)


class TimeSeriesPanel(BaseModel):
    """
    A T×p observation matrix x_1..x_T.

    - values: rows are time points, columns are series
    - labels: one name per column
    - t0_row: X_0, the row preceding the sample; used for the first difference
    - provenance: transforms applied so far

    When t0_row is absent the first difference is taken against zero, the
    convention of a process started at X_0 = 0.
    """
    model_config = MODEL_CONFIG

    values: Array
    labels: List[str]
    t0_row: Optional[Array] = None
    provenance: Provenance = Field(default_factory=Provenance)

    @model_validator(mode="after")
    def _check_shape(self):
        if self.values.ndim != 2:
            raise DimensionError(f"panel values must be 2-D, got shape {self.values.shape}")
        T, p = self.values.shape
        if T < 2:
            raise DimensionError(f"panel needs at least 2 rows, got {T}")
        if p < 1:
            raise DimensionError("panel needs at least 1 column")
        if len(self.labels) != p:
            raise DimensionError(f"{len(self.labels)} labels for {p} columns")
        if not np.all(np.isfinite(self.values)):
            raise DimensionError("panel contains non-finite values")
        if self.t0_row is not None and self.t0_row.shape != (p,):
            raise DimensionError(f"t0_row has shape {self.t0_row.shape}, expected ({p},)")
        return self

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def x0(self) -> np.ndarray:
        """X_0 row, zero when not recorded."""
        if self.t0_row is None:
            return np.zeros(self.p)
        return np.asarray(self.t0_row)


class SelectionMatrix(BaseModel):
    """p×m full column rank matrix H applied as x_t ↦ H′x_t."""
    model_config = MODEL_CONFIG

    H: Array
    kind: Literal["subset", "aggregate", "custom"] = "custom"

    @model_validator(mode="after")
    def _check_rank(self):
        if self.H.ndim != 2:
            raise DimensionError(f"selection matrix must be 2-D, got shape {self.H.shape}")
        p, m = self.H.shape
        if m < 1 or m > p:
            raise DimensionError(f"selection matrix must be p×m with 1 ≤ m ≤ p, got {p}×{m}")
        sv = np.linalg.svd(self.H, compute_uv=False)
        if sv[-1] <= 1e-10 * sv[0]:
            raise DimensionError(
                f"selection matrix is rank deficient (singular values {sv[0]:.3g} .. {sv[-1]:.3g})"
            )
        return self

    @property
    def p(self) -> int:
        return self.H.shape[0]

    @property
    def m(self) -> int:
        return self.H.shape[1]


# ---------------------------------------------------------------------------
# Basis
# ---------------------------------------------------------------------------


class BasisMatrix(BaseModel):
    """T×K design with row t equal to φ_K(t/T)′."""
    model_config = MODEL_CONFIG

    values: Array
    kind: Literal["KL", "custom"] = "KL"
    K: int
    T: int

    _mdd_factor: Optional[Tuple[np.ndarray, bool]] = PrivateAttr(default=None)
    _mdd_min_eig: Optional[float] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _check_shape(self):
        if self.values.shape != (self.T, self.K):
            raise DimensionError(
                f"basis values have shape {self.values.shape}, expected ({self.T}, {self.K})"
            )
        return self


class KGrid(BaseModel):
    """K_i = K(1 + i·j) for i = 0..m."""
    model_config = MODEL_CONFIG

    base_K: int = Field(ge=1)
    j: int = Field(default=0, ge=0)
    m: int = Field(default=0, ge=0)

    @computed_field
    @property
    def values(self) -> List[int]:
        return [self.base_K * (1 + i * self.j) for i in range(self.m + 1)]


# ---------------------------------------------------------------------------
# Canonical correlations and trend counts
# ---------------------------------------------------------------------------


class ConditionReport(BaseModel):
    model_config = MODEL_CONFIG

    mff_min_eig: float
    mff_max_eig: float
    mdd_min_eig: float
    max_clamp: float = 0.0
    clamp_warning: bool = False


class CcaResult(BaseModel):
    """Squared canonical correlations λ₁ ≥ … ≥ λ_p and V with V′M_ffV = I_p."""
    model_config = MODEL_CONFIG

    eigenvalues: Array
    eigenvectors: Array
    condition: ConditionReport

    @property
    def p(self) -> int:
        return self.eigenvalues.shape[0]


class CriterionPoint(BaseModel):
    model_config = MODEL_CONFIG

    index: int
    value: float


class SequentialStep(BaseModel):
    model_config = MODEL_CONFIG

    j: int
    statistic: float
    critical_value: float
    rejected: bool


class TrendCountEstimate(BaseModel):
    """
    Estimated number of stochastic trends.

    tie_set holds every index attaining the maximum; s_hat is its smallest
    element. criterion holds f_j(i) over the admissible set for argmax
    methods, trajectory the test sequence for sequential methods.
    """
    model_config = MODEL_CONFIG

    s_hat: int
    p: int
    method: CountMethod
    tie_set: List[int] = Field(default_factory=list)
    criterion: List[CriterionPoint] = Field(default_factory=list)
    trajectory: List[SequentialStep] = Field(default_factory=list)

    @computed_field
    @property
    def r_hat(self) -> int:
        return self.p - self.s_hat

    @model_validator(mode="after")
    def _check_range(self):
        if not 0 <= self.s_hat <= self.p:
            raise DimensionError(f"s_hat={self.s_hat} outside [0, {self.p}]")
        if self.tie_set and self.s_hat not in self.tie_set:
            raise DimensionError(f"s_hat={self.s_hat} not in tie set {self.tie_set}")
        return self


class IdentificationDecision(BaseModel):
    model_config = MODEL_CONFIG

    accept: bool
    s_full: int
    s_transformed: int
    method: CountMethod
    b_columns: Optional[List[int]] = None
    alternatives: List[List[int]] = Field(default_factory=list)


class MisspecDiagnostic(BaseModel):
    """Log-log points of the pivotal statistic over a K grid plus the stripe test at the base K."""
    model_config = MODEL_CONFIG

    k_grid: KGrid
    s: int
    norm: Norm
    eta: float
    location: Location = Location.MEAN
    tau: List[Array]
    log_points: List[Tuple[float, float]]
    fitted_slope: Optional[float]
    stripe_center: Array
    stripe_delta: float
    stripe_distance: float
    inside_stripe: bool


# ---------------------------------------------------------------------------
# Limit law
# ---------------------------------------------------------------------------

TABLE_FORMAT_VERSION = 1


def _lookup(mapping: Dict[float, float], eta: float, what: str) -> float:
    for key, value in mapping.items():
        if math.isclose(float(key), eta, rel_tol=1e-9, abs_tol=1e-12):
            return value
    raise TableError(f"no {what} entry for eta={eta} (available: {sorted(mapping)})")


class LimitLawTable(BaseModel):
    """
    Simulated law of ζ^(s), the ordered eigenvalues of (∫B₁B₁′)⁻¹.

    Quantile maps are keyed by η and hold the (1−η)-quantile. stripe_delta is
    centred at mean_log, stripe_delta_median at median_log.
    """
    model_config = MODEL_CONFIG

    format_version: int = TABLE_FORMAT_VERSION
    s: int = Field(ge=1)
    n_reps: int
    n_steps: int
    seed: int
    quantiles_trace: Dict[float, float]
    quantiles_max: Dict[float, float]
    mean_log: Array
    median_log: Array
    stripe_delta: Dict[float, float]
    stripe_delta_median: Dict[float, float] = Field(default_factory=dict)
    n_redrawn: int = 0

    def quantile(self, norm: Norm | str, eta: float) -> float:
        if Norm(norm) is Norm.ONE:
            return _lookup(self.quantiles_trace, eta, f"trace quantile (s={self.s})")
        return _lookup(self.quantiles_max, eta, f"max quantile (s={self.s})")

    def delta(self, eta: float, location: Location | str = Location.MEAN) -> float:
        if Location(location) is Location.MEDIAN:
            return _lookup(self.stripe_delta_median, eta, f"median stripe width (s={self.s})")
        return _lookup(self.stripe_delta, eta, f"stripe width (s={self.s})")


class LimitLawCatalog(BaseModel):
    """Tables for s = 1..s_max built with common settings."""
    model_config = MODEL_CONFIG

    tables: Dict[int, LimitLawTable] = Field(default_factory=dict)

    def table(self, s: int) -> LimitLawTable:
        if s not in self.tables:
            raise TableError(f"no limit-law table for s={s} (available: {sorted(self.tables)})")
        return self.tables[s]

    @property
    def s_max(self) -> int:
        return max(self.tables, default=0)

    def digest(self) -> str:
        """sha256 of the canonical JSON body."""
        body = json.dumps(self.model_dump(mode="json"), sort_keys=True)
        return hashlib.sha256(body.encode()).hexdigest()


# ---------------------------------------------------------------------------
# Loadings and inference
# ---------------------------------------------------------------------------


class IdentificationPair(BaseModel):
    """b (p×s) and c (p×r) with c′b = 0, fixing b′ψ = I_s and c′β = I_r."""
    model_config = MODEL_CONFIG

    b: Array
    c: Array

    @model_validator(mode="after")
    def _check(self):
        if self.b.ndim != 2 or self.c.ndim != 2 or self.b.shape[0] != self.c.shape[0]:
            raise DimensionError(f"b {self.b.shape} and c {self.c.shape} must both have p rows")
        p, s = self.b.shape
        if s + self.c.shape[1] != p:
            raise DimensionError(f"b and c must have s + r = p columns, got {s} + {self.c.shape[1]} != {p}")
        for name, mat in (("b", self.b), ("c", self.c)):
            if mat.shape[1] and np.linalg.matrix_rank(mat) < mat.shape[1]:
                raise DimensionError(f"{name} is not of full column rank")
        if s and self.c.shape[1]:
            scale = max(np.abs(self.b).max(), 1.0) * max(np.abs(self.c).max(), 1.0)
            if np.abs(self.c.T @ self.b).max() > 1e-10 * scale:
                raise DimensionError("c′b must be zero")
        return self

    @property
    def p(self) -> int:
        return self.b.shape[0]

    @property
    def s(self) -> int:
        return self.b.shape[1]

    @property
    def r(self) -> int:
        return self.c.shape[1]

    def b_bar(self) -> np.ndarray:
        return self.b @ np.linalg.inv(self.b.T @ self.b) if self.s else self.b

    def c_bar(self) -> np.ndarray:
        return self.c @ np.linalg.inv(self.c.T @ self.c) if self.r else self.c


class LoadingEstimate(BaseModel):
    """
    Identified loadings ψ̂ (p×s) and cointegration vectors β̂ (p×r).

    psi_star = c̄′ψ̂ and beta_star = b̄′β̂ are the unrestricted blocks; they
    satisfy psi_star = −beta_star′.
    """
    model_config = MODEL_CONFIG

    method: Literal["one-step", "icc"]
    psi_hat: Array
    beta_hat: Array
    psi_star: Array
    beta_star: Array
    iterations: int
    converged: bool
    step_norms: List[float] = Field(default_factory=list)
    pair: IdentificationPair

    @property
    def s(self) -> int:
        return self.psi_hat.shape[1]

    @property
    def r(self) -> int:
        return self.beta_hat.shape[1]


class LrvEstimate(BaseModel):
    model_config = MODEL_CONFIG

    omega: Array
    s: int
    omega_221: Array

    @property
    def omega_11(self) -> np.ndarray:
        return self.omega[: self.s, : self.s]

    @property
    def omega_12(self) -> np.ndarray:
        return self.omega[: self.s, self.s :]

    @property
    def omega_21(self) -> np.ndarray:
        return self.omega[self.s :, : self.s]

    @property
    def omega_22(self) -> np.ndarray:
        return self.omega[self.s :, self.s :]


class WaldResult(BaseModel):
    model_config = MODEL_CONFIG

    Q: float = Field(ge=0)
    Q_dual: float
    dof: int
    p_value: float = Field(ge=0, le=1)
    R: Array
    h: Array


class CoefficientTable(BaseModel):
    """Per-coefficient inference on ψ̂_* (r×s): estimate, standard error, Wald Q and p-value."""
    model_config = MODEL_CONFIG

    estimate: Array
    std_error: Array
    wald: Array
    p_value: Array


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


class DgpConfig(BaseModel):
    """ΔX_t = αβ′X_{t−1} + ε_t with β = (I_{p−s}, 0)′, α = −aβ, X_0 = 0."""
    model_config = MODEL_CONFIG

    p: int = Field(ge=1)
    s: int = Field(ge=0)
    a: float = Field(gt=0, le=1)
    T: int = Field(ge=2)
    seed: int = 0

    @model_validator(mode="after")
    def _check_s(self):
        if self.s > self.p:
            raise DimensionError(f"s={self.s} exceeds p={self.p}")
        return self


class ExperimentResult(BaseModel):
    model_config = MODEL_CONFIG

    p: int
    s: int
    a: float
    T: int
    K: int
    method: CountMethod
    n_reps: int
    n_failed: int = 0
    freq_correct: float = Field(ge=0, le=1)
    mae: float = Field(ge=0)

    @computed_field
    @property
    def mc_se(self) -> float:
        if self.n_reps == 0:
            return 0.0
        return math.sqrt(self.freq_correct * (1 - self.freq_correct) / self.n_reps)


class GridPoint(BaseModel):
    model_config = MODEL_CONFIG

    p: int = Field(ge=1)
    s: int = Field(ge=0)
    a: float = Field(gt=0, le=1)
    T: int = Field(ge=2)


class GridFile(BaseModel):
    """Monte Carlo grid description, either explicit points or the standard design."""
    model_config = MODEL_CONFIG

    points: List[GridPoint] = Field(default_factory=list)
    design_p: List[int] = Field(default_factory=list)
    full: bool = False
    methods: List[CountMethod] = Field(default_factory=lambda: [CountMethod.MAX_GAP])
    eta: float = 0.05
    K: Optional[int] = None


# ---------------------------------------------------------------------------
# Configuration and reports
# ---------------------------------------------------------------------------


class AnalysisConfig(BaseModel):
    """Every knob of the analysis pipeline; loaded from JSON, overridden by CLI flags."""
    model_config = MODEL_CONFIG

    log: bool = False
    normalize_start: bool = False
    init_mode: InitMode = InitMode.LEVELS
    K: Optional[int] = Field(default=None, ge=1)
    k_grid_j: int = Field(default=1, ge=0)
    k_grid_m: int = Field(default=2, ge=0)
    eta: float = Field(default=0.05, gt=0, lt=1)
    norm: Norm = Norm.INFINITY
    location: Location = Location.MEAN
    count_method: CountMethod = CountMethod.MAX_GAP
    include_zero: bool = False
    s: Optional[int] = Field(default=None, ge=0)
    b_columns: Optional[List[int]] = None
    c_columns: Optional[List[int]] = None
    tol: float = Field(default=1e-10, gt=0)
    max_iter: int = Field(default=50, ge=2)
    seed: int = 20240101
    table_reps: int = Field(default=10000, ge=100)
    table_steps: int = Field(default=1000, ge=10)

    @field_validator("b_columns", "c_columns")
    @classmethod
    def _non_negative(cls, v):
        if v is not None and any(i < 0 for i in v):
            raise ValueError("column indices must be non-negative")
        return v


REPORT_SCHEMA_VERSION = 1


class AnalysisReport(BaseModel):
    model_config = MODEL_CONFIG

    schema_version: int = REPORT_SCHEMA_VERSION
    tool_version: str
    generated_at: datetime
    seed: int
    provenance: Provenance
    labels: List[str]
    T: int
    p: int
    K: int
    eigenvalues: Array
    counts: Dict[str, TrendCountEstimate]
    s_used: int
    identification: Optional[IdentificationDecision] = None
    loadings: Optional[LoadingEstimate] = None
    lrv: Optional[LrvEstimate] = None
    coefficients: Optional[CoefficientTable] = None
    wald: Optional[WaldResult] = None
    misspec: Optional[MisspecDiagnostic] = None
    table_digest: Optional[str] = None
    config: AnalysisConfig
