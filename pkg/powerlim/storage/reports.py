"""Conversion of service results into report sections."""

from __future__ import annotations

from typing import Any, Iterable, Sequence

import numpy as np

from powerlim.services.expflow import TrajectoryReport
from powerlim.services.jordan import EigCluster
from powerlim.services.oracle import CheckResult, SuiteReport
from powerlim.services.yamamoto import GrowthReport, InvarianceTrace, ProjectionFlag
from powerlim.storage.matrix_io import matrix_to_file
from powerlim.storage.schemas import (
    CheckEntry,
    ChecksSection,
    CheckSummary,
    ClusterEntry,
    FlagSection,
    GrowthEntry,
    InvarianceSection,
    SeriesPoint,
    ShellStepEntry,
    TrajectoryEntry,
    WitnessSection,
)
from powerlim.utils import finite_or_none


def pair(value: complex) -> tuple[float, float]:
    value = complex(value)
    return (float(value.real), float(value.imag))


def pairs(values: Iterable[complex]) -> list[tuple[float, float]]:
    return [pair(value) for value in values]


def plain(value: Any) -> Any:
    """JSON-friendly copy of a context value."""
    if isinstance(value, dict):
        return {str(key): plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(item) for item in value]
    if isinstance(value, np.generic):
        return plain(value.item())
    if isinstance(value, complex):
        return list(pair(value))
    if isinstance(value, float):
        return finite_or_none(value)
    return value


def cluster_entries(clusters: Sequence[EigCluster]) -> list[ClusterEntry]:
    return [
        ClusterEntry(
            center=pair(cluster.center),
            multiplicity=cluster.multiplicity,
            members=pairs(cluster.values),
        )
        for cluster in clusters
    ]


def flag_section(flag: ProjectionFlag) -> FlagSection:
    return FlagSection(
        levels=list(flag.levels),
        multiplicities=list(flag.multiplicities),
        projections=[matrix_to_file(projection.data) for projection in flag.projections],
    )


def series_points(series: Sequence[tuple[float, float]]) -> list[SeriesPoint]:
    return [SeriesPoint(n=float(n), value=finite_or_none(value)) for n, value in series]


def invariance_section(trace: InvarianceTrace) -> InvarianceSection:
    return InvarianceSection(
        holds=trace.holds,
        initial_shell=trace.initial_shell,
        degenerate_at=trace.degenerate_at,
        steps=[
            ShellStepEntry(
                step=step.step,
                shell_index=step.shell_index,
                norm=step.norm,
                degenerate=step.degenerate,
            )
            for step in trace.steps
        ],
    )


def growth_entry(index: int, report: GrowthReport, trace: InvarianceTrace | None) -> GrowthEntry:
    return GrowthEntry(
        index=index,
        shell_index=report.shell_index,
        exponent=report.exponent,
        series=series_points(report.series),
        invariance=invariance_section(trace) if trace is not None else None,
    )


def trajectory_entry(index: int, report: TrajectoryReport) -> TrajectoryEntry:
    witness = report.witness
    return TrajectoryEntry(
        index=index,
        shell_index=report.shell_index,
        growth_base=report.growth_base,
        witness=WitnessSection(
            rho=witness.rho,
            omega=witness.omega,
            times=list(witness.times),
            log_norms=[finite_or_none(value) for value in witness.log_norms],
            rates=[finite_or_none(value) for value in witness.rates],
            lower_constant=finite_or_none(witness.lower_constant),
            upper_constant=finite_or_none(witness.upper_constant),
        ),
    )


def check_entry(result: CheckResult) -> CheckEntry:
    return CheckEntry(
        name=result.name,
        lhs=finite_or_none(result.lhs),
        rhs=finite_or_none(result.rhs),
        slack=finite_or_none(result.slack),
        passed=result.passed,
        context=plain(result.context),
    )


def _summaries(results: Sequence[CheckResult]) -> list[CheckSummary]:
    grouped: dict[str, list[CheckResult]] = {}
    for result in results:
        grouped.setdefault(result.name, []).append(result)
    return [
        CheckSummary(
            name=name,
            total=len(items),
            failed=sum(not item.passed for item in items),
            min_slack=finite_or_none(min(item.slack for item in items)),
        )
        for name, items in grouped.items()
    ]


def checks_section(suite: SuiteReport, matrix_results: Sequence[CheckResult] = ()) -> ChecksSection:
    everything = [*suite.results, *matrix_results]
    failures = [result for result in everything if not result.passed]
    return ChecksSection(
        seed=suite.seed,
        instances=suite.instances,
        dims=list(suite.dims),
        total=len(everything),
        failed=len(failures),
        summary=_summaries(everything),
        matrix_checks=[check_entry(result) for result in matrix_results],
        failures=[check_entry(result) for result in failures],
    )
