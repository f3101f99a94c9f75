from __future__ import annotations

from typing import Any

from pydantic import BaseModel, ConfigDict, Field, model_validator

ComplexPair = tuple[float, float]


class MatrixFile(BaseModel):
    """Row-major [re, im] pairs."""

    model_config = ConfigDict(frozen=True)

    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    data: list[ComplexPair]

    @model_validator(mode="after")
    def check_length(self) -> "MatrixFile":
        if len(self.data) != self.rows * self.cols:
            raise ValueError(
                f"data has {len(self.data)} entries, expected rows·cols = {self.rows * self.cols}"
            )
        return self


class VectorEntry(BaseModel):
    data: list[ComplexPair]


class ClusterEntry(BaseModel):
    center: ComplexPair
    multiplicity: int
    members: list[ComplexPair]


class FlagSection(BaseModel):
    levels: list[float]
    multiplicities: list[int]
    projections: list[MatrixFile]


class SeriesPoint(BaseModel):
    n: float
    value: float | None


class SingularValueSection(BaseModel):
    limits: list[float]
    series: list[list[SeriesPoint]]


class ShellStepEntry(BaseModel):
    step: int
    shell_index: int | None
    norm: float
    degenerate: bool


class InvarianceSection(BaseModel):
    holds: bool
    initial_shell: int
    degenerate_at: int | None
    steps: list[ShellStepEntry]


class GrowthEntry(BaseModel):
    index: int
    shell_index: int | None = None
    exponent: float | None = None
    series: list[SeriesPoint] = Field(default_factory=list)
    invariance: InvarianceSection | None = None
    error: dict[str, Any] | None = None


class WitnessSection(BaseModel):
    rho: float
    omega: float
    times: list[float]
    log_norms: list[float | None]
    rates: list[float | None]
    lower_constant: float | None
    upper_constant: float | None


class TrajectoryEntry(BaseModel):
    index: int
    shell_index: int | None = None
    growth_base: float | None = None
    witness: WitnessSection | None = None
    error: dict[str, Any] | None = None


class ExpSection(BaseModel):
    realpart_flag: FlagSection
    limit: MatrixFile
    iterative: MatrixFile
    iterations: int
    trajectories: list[TrajectoryEntry] = Field(default_factory=list)


class CheckEntry(BaseModel):
    name: str
    lhs: float | None
    rhs: float | None
    slack: float | None
    passed: bool
    context: dict[str, Any] = Field(default_factory=dict)


class CheckSummary(BaseModel):
    name: str
    total: int
    failed: int
    min_slack: float | None


class ChecksSection(BaseModel):
    seed: int | None
    instances: int
    dims: list[int]
    total: int
    failed: int
    summary: list[CheckSummary]
    matrix_checks: list[CheckEntry] = Field(default_factory=list)
    failures: list[CheckEntry] = Field(default_factory=list)


class AnalysisReport(BaseModel):
    command: str
    input_digest: str | None = None
    dimension: int | None = None
    eigenvalues: list[ComplexPair] | None = None
    clusters: list[ClusterEntry] | None = None
    jc_residuals: dict[str, float | None] | None = None
    flag: FlagSection | None = None
    h_closed_form: MatrixFile | None = None
    h_iterative: MatrixFile | None = None
    iterations: int | None = None
    singular_value_limits: SingularValueSection | None = None
    growth: list[GrowthEntry] | None = None
    exp: ExpSection | None = None
    checks: ChecksSection | None = None
