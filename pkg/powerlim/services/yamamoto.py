from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, TypeVar

import numpy as np

from powerlim.config import get_settings
from powerlim.errors import ClusteringError, DomainError
from powerlim.services.graded import GradedPower
from powerlim.services.jordan import cluster_values, default_cluster_tol
from powerlim.services.matcore import (
    PsdMatrix,
    as_matrix,
    as_psd,
    op_norm,
    ordered_schur,
    power_ladder,
    psd_from_spectrum,
    scaled_power,
    schur,
)
from powerlim.utils import nonzero_vector

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProjectionFlag:
    """Nested orthogonal projections P_1 ≤ … ≤ P_k = I ordered by a real key of the spectrum."""

    levels: tuple[float, ...]
    multiplicities: tuple[int, ...]
    projections: tuple[PsdMatrix, ...]
    cluster_tol: float

    @property
    def k(self) -> int:
        return len(self.levels)

    @property
    def size(self) -> int:
        return self.projections[-1].size

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(int(rank) for rank in np.cumsum(self.multiplicities))

    def level(self, j: int) -> np.ndarray:
        """P_j, with P_0 = 0."""
        if j == 0:
            return np.zeros((self.size, self.size), dtype=np.complex128)
        return self.projections[j - 1].data

    def shell_of(self, x: Any, mem_tol: float | None = None) -> int:
        vector = nonzero_vector(x, self.size)
        tol = get_settings().mem_tol if mem_tol is None else mem_tol
        scale = float(np.linalg.norm(vector))
        for j in range(1, self.k + 1):
            if np.linalg.norm(self.level(j) @ vector - vector) <= tol * scale:
                return j
        return self.k

    def descending_values(self) -> list[float]:
        values: list[float] = []
        for value, count in zip(reversed(self.levels), reversed(self.multiplicities)):
            values.extend([value] * count)
        return values

    def combination(self, weights: list[float]) -> PsdMatrix:
        """Σ_j w_j (P_j − P_{j−1})."""
        total = np.zeros((self.size, self.size), dtype=np.complex128)
        for j, weight in enumerate(weights, start=1):
            total = total + weight * (self.level(j) - self.level(j - 1))
        return as_psd(total)


@dataclass(frozen=True)
class ModulusFlag(ProjectionFlag):
    @property
    def moduli(self) -> tuple[float, ...]:
        return self.levels


FlagT = TypeVar("FlagT", bound=ProjectionFlag)


def build_flag(
    a: Any,
    key: Callable[[complex], float],
    flag_type: type[FlagT],
    cluster_tol: float | None = None,
) -> FlagT:
    """Group the spectrum by ``key`` (single linkage) and build the nested invariant projections."""
    matrix = as_matrix(a)
    tol = default_cluster_tol(matrix) if cluster_tol is None else cluster_tol
    m = matrix.shape[0]
    _, t = schur(matrix)
    keys = np.array([key(complex(value)) for value in np.diag(t)])
    groups = sorted(cluster_values(keys, tol), key=lambda group: float(np.mean(keys[group])))

    levels = tuple(float(np.mean(keys[group])) for group in groups)
    multiplicities = tuple(len(group) for group in groups)
    projections: list[PsdMatrix] = []
    expected = 0
    for group, multiplicity in zip(groups[:-1], multiplicities[:-1]):
        expected += multiplicity
        threshold = float(np.max(keys[group])) + tol / 2
        q, _, r = ordered_schur(matrix, lambda value: key(value) <= threshold)
        if r != expected:
            raise ClusteringError(f"flag level selected {r} eigenvalues, expected {expected}")
        spectrum = np.concatenate([np.ones(r), np.zeros(m - r)])
        projections.append(psd_from_spectrum(spectrum, q))
    projections.append(psd_from_spectrum(np.ones(m), np.eye(m, dtype=np.complex128)))
    return flag_type(
        levels=levels,
        multiplicities=multiplicities,
        projections=tuple(projections),
        cluster_tol=tol,
    )


def modulus_flag(a: Any, cluster_tol: float | None = None) -> ModulusFlag:
    flag = build_flag(a, abs, ModulusFlag, cluster_tol)
    logger.info("modulus_flag: moduli %s with multiplicities %s", flag.moduli, flag.multiplicities)
    return flag


@dataclass(frozen=True)
class AsymptoticLimit:
    h: PsdMatrix
    flag: ModulusFlag


def limit_matrix(a: Any, cluster_tol: float | None = None) -> AsymptoticLimit:
    flag = modulus_flag(a, cluster_tol)
    return AsymptoticLimit(h=flag.combination(list(flag.moduli)), flag=flag)


def growth_subspace(flag: ModulusFlag, r: float) -> np.ndarray:
    """Projection onto V(A, r) = {x : limsup ‖Aⁿx‖^{1/n} ≤ r}."""
    if r < 0:
        raise DomainError(f"r must be non-negative, got {r}")
    level = 0
    for j, modulus in enumerate(flag.moduli, start=1):
        if modulus <= r:
            level = j
    return flag.level(level)


def root_of_power(graded: GradedPower, n: int | None = None) -> PsdMatrix:
    """|X|^{1/n} for a graded X = Aⁿ."""
    exponent = graded.exponent if n is None else n
    log_sv, vectors = graded.singular_values(get_settings().grade_gap)
    return psd_from_spectrum(np.exp(log_sv / exponent), vectors)


def iterate_limit(a: Any, k: int) -> PsdMatrix:
    """|Aⁿ|^{1/n} at n = 2^K."""
    power = scaled_power(a, k)
    return root_of_power(power.graded)


@dataclass(frozen=True)
class GrowthReport:
    vector: np.ndarray
    shell_index: int
    exponent: float
    series: tuple[tuple[int, float], ...] = field(default_factory=tuple)


def growth_exponent_exact(flag: ModulusFlag, x: Any, mem_tol: float | None = None) -> GrowthReport:
    vector = nonzero_vector(x, flag.size)
    shell = flag.shell_of(vector, mem_tol)
    return GrowthReport(vector=vector, shell_index=shell, exponent=flag.moduli[shell - 1])


def growth_series(a: Any, x: Any, k: int) -> tuple[tuple[int, float], ...]:
    """(n, ‖Aⁿx‖^{1/n}) for n = 2^K′, K′ = 1..K, evaluated in the log domain."""
    matrix = as_matrix(a)
    vector = nonzero_vector(x, matrix.shape[0])
    if k < 1:
        raise DomainError(f"K must be at least 1, got {k}")
    series = []
    for power in power_ladder(matrix, k)[1:]:
        log_norm = power.graded.log_norm_of(vector)
        series.append((power.exponent, float(np.exp(log_norm / power.exponent))))
    return tuple(series)


def growth_exponent_iterative(a: Any, x: Any, k: int) -> float:
    return growth_series(a, x, k)[-1][1]


def growth_report(
    a: Any,
    x: Any,
    flag: ModulusFlag | None = None,
    mem_tol: float | None = None,
    k: int | None = None,
) -> GrowthReport:
    flag = modulus_flag(a) if flag is None else flag
    iterations = get_settings().iterations if k is None else k
    exact = growth_exponent_exact(flag, x, mem_tol)
    series = growth_series(a, exact.vector, iterations) if iterations >= 1 else ()
    return GrowthReport(
        vector=exact.vector, shell_index=exact.shell_index, exponent=exact.exponent, series=series
    )


@dataclass(frozen=True)
class ShellStep:
    step: int
    shell_index: int | None
    norm: float
    degenerate: bool = False


@dataclass(frozen=True)
class InvarianceTrace:
    holds: bool
    initial_shell: int
    steps: tuple[ShellStep, ...]

    @property
    def degenerate_at(self) -> int | None:
        for step in self.steps:
            if step.degenerate:
                return step.step
        return None


def shell_invariance_check(
    a: Any, flag: ModulusFlag, x: Any, steps: int, mem_tol: float | None = None
) -> InvarianceTrace:
    matrix = as_matrix(a)
    settings = get_settings()
    vector = nonzero_vector(x, matrix.shape[0])
    initial = flag.shell_of(vector, mem_tol)
    norm_a = op_norm(matrix)
    x_norm = float(np.linalg.norm(vector))
    can_vanish = flag.moduli[0] <= flag.cluster_tol

    trace: list[ShellStep] = []
    holds = True
    current = vector
    for i in range(1, steps + 1):
        current = matrix @ current
        norm = float(np.linalg.norm(current))
        if norm == 0 or (can_vanish and norm <= settings.tol_fact * norm_a**i * x_norm):
            trace.append(ShellStep(step=i, shell_index=None, norm=norm, degenerate=True))
            break
        shell = flag.shell_of(current, mem_tol)
        trace.append(ShellStep(step=i, shell_index=shell, norm=norm))
        holds = holds and shell == initial
    return InvarianceTrace(holds=holds, initial_shell=initial, steps=tuple(trace))


@dataclass(frozen=True)
class SingularValueLimits:
    limits: tuple[float, ...]
    series: tuple[tuple[tuple[int, float], ...], ...]


def singular_value_limits(
    a: Any, cluster_tol: float | None = None, k: int | None = None
) -> SingularValueLimits:
    matrix = as_matrix(a)
    settings = get_settings()
    iterations = settings.iterations if k is None else k
    flag = modulus_flag(matrix, cluster_tol)
    m = matrix.shape[0]
    columns: list[list[tuple[int, float]]] = [[] for _ in range(m)]
    for power in power_ladder(matrix, iterations)[1:]:
        log_sv, _ = power.graded.singular_values(settings.grade_gap)
        for j in range(m):
            columns[j].append((power.exponent, float(np.exp(log_sv[j] / power.exponent))))
    return SingularValueLimits(
        limits=tuple(flag.descending_values()),
        series=tuple(tuple(column) for column in columns),
    )


def trace_convergence(a: Any, p: float, k: int | None = None) -> tuple[tuple[int, float], ...]:
    """(n, tr(|Aⁿ|^{p/n})) for n = 2^K′, K′ = 0..K."""
    if not np.isfinite(p) or p <= 0:
        raise DomainError(f"trace_convergence needs p > 0, got {p}")
    settings = get_settings()
    iterations = settings.iterations if k is None else k
    series = []
    for power in power_ladder(a, iterations):
        log_sv, _ = power.graded.singular_values(settings.grade_gap)
        series.append((power.exponent, float(np.sum(np.exp(p * log_sv / power.exponent)))))
    return tuple(series)


def eigenvalue_moduli_power_sum(a: Any, p: float) -> float:
    _, t = schur(a)
    return float(np.sum(np.abs(np.diag(t)) ** p))
