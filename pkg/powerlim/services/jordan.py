from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage

from powerlim.config import get_settings
from powerlim.errors import ClusteringError, DomainError, IllConditionedClusterError, SeparationError
from powerlim.services.matcore import as_matrix, op_norm, ordered_schur, schur, sylvester_solve

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EigCluster:
    center: complex
    members: tuple[tuple[complex, int], ...]

    @property
    def multiplicity(self) -> int:
        return len(self.members)

    @property
    def values(self) -> np.ndarray:
        return np.array([value for value, _ in self.members], dtype=np.complex128)

    @property
    def diameter(self) -> float:
        values = self.values
        return float(np.max(np.abs(values[:, None] - values[None, :])))

    def contains(self, value: complex, tol: float) -> bool:
        return bool(np.min(np.abs(self.values - value)) <= tol)


@dataclass(frozen=True)
class JCDecomp:
    a: np.ndarray
    d: np.ndarray
    n: np.ndarray
    clusters: tuple[EigCluster, ...]
    projectors: tuple[np.ndarray, ...]
    cluster_tol: float

    def commutator_residual(self) -> float:
        """‖DN − ND‖ / ‖A‖²."""
        value = float(np.linalg.norm(self.d @ self.n - self.n @ self.d, 2))
        return _relative(value, op_norm(self.a) ** 2)

    def nilpotency_residual(self) -> float:
        """‖N^m‖ / ‖A‖^m."""
        m = self.a.shape[0]
        value = float(np.linalg.norm(np.linalg.matrix_power(self.n, m), 2))
        return _relative(value, op_norm(self.a) ** m)

    def partition_residual(self) -> float:
        m = self.a.shape[0]
        worst = float(np.linalg.norm(sum(self.projectors) - np.eye(m), 2))
        for i, first in enumerate(self.projectors):
            worst = max(worst, float(np.linalg.norm(first @ first - first, 2)))
            for second in self.projectors[i + 1 :]:
                worst = max(worst, float(np.linalg.norm(first @ second, 2)))
                worst = max(worst, float(np.linalg.norm(second @ first, 2)))
        return worst

    def commutation_residual(self) -> float:
        """max_c ‖P_c A − A P_c‖ / ‖A‖."""
        scale = op_norm(self.a)
        worst = 0.0
        for projector in self.projectors:
            worst = max(worst, float(np.linalg.norm(projector @ self.a - self.a @ projector, 2)))
        return _relative(worst, scale)

    def residuals(self) -> dict[str, float]:
        return {
            "commutator": self.commutator_residual(),
            "nilpotency": self.nilpotency_residual(),
            "partition": self.partition_residual(),
            "commutation": self.commutation_residual(),
            "diagonalizability": diagonalizability_residual(self),
        }


def _relative(value: float, scale: float) -> float:
    if scale <= 0:
        return value
    return value / scale


def default_cluster_tol(a: Any) -> float:
    return get_settings().default_cluster_tol(op_norm(as_matrix(a)))


def cluster_values(points: Sequence[complex], tol: float) -> list[list[int]]:
    """Single-linkage groups of point indices: chains of steps each at most ``tol``."""
    values = np.asarray(points, dtype=np.complex128).reshape(-1)
    if values.size == 0:
        return []
    if values.size == 1:
        return [[0]]
    coords = np.column_stack([values.real, values.imag])
    tree = linkage(coords, method="single")
    labels = fcluster(tree, t=max(tol, 0.0), criterion="distance")
    groups: dict[int, list[int]] = {}
    for index, label in enumerate(labels):
        groups.setdefault(int(label), []).append(index)
    return list(groups.values())


def cluster_eigenvalues(eigs: Sequence[complex], cluster_tol: float) -> list[EigCluster]:
    values = np.asarray(eigs, dtype=np.complex128).reshape(-1)
    if values.size == 0:
        raise DomainError("cannot cluster an empty spectrum")
    if cluster_tol < 0:
        raise DomainError(f"cluster_tol must be non-negative, got {cluster_tol}")
    clusters = []
    for group in cluster_values(values, cluster_tol):
        members = tuple((complex(values[i]), i) for i in group)
        center = complex(np.mean([value for value, _ in members]))
        clusters.append(EigCluster(center=center, members=members))
    clusters.sort(key=lambda cluster: (abs(cluster.center), float(np.angle(cluster.center))))
    return clusters


def spectral_projector(
    a: Any,
    cluster: EigCluster,
    cluster_tol: float | None = None,
    sep_tol: float | None = None,
) -> np.ndarray:
    """Oblique projector onto the generalized eigenspace of ``cluster`` along the rest."""
    matrix = as_matrix(a)
    tol = default_cluster_tol(matrix) if cluster_tol is None else cluster_tol
    q, t, r = ordered_schur(matrix, lambda value: cluster.contains(value, tol))
    if r != cluster.multiplicity:
        raise ClusteringError(
            f"ordered Schur selected {r} eigenvalues for a cluster of multiplicity "
            f"{cluster.multiplicity}"
        )
    try:
        x = sylvester_solve(t[:r, :r], t[r:, r:], t[:r, r:], sep_tol)
    except SeparationError as exc:
        raise IllConditionedClusterError(cluster.center, tol, exc) from exc
    m = matrix.shape[0]
    block = np.zeros((m, m), dtype=np.complex128)
    block[:r, :r] = np.eye(r)
    block[:r, r:] = x
    projector = q @ block @ q.conj().T
    projector.setflags(write=False)
    return projector


def jordan_chevalley(
    a: Any, cluster_tol: float | None = None, sep_tol: float | None = None
) -> JCDecomp:
    matrix = as_matrix(a)
    tol = default_cluster_tol(matrix) if cluster_tol is None else cluster_tol
    _, t = schur(matrix)
    clusters = cluster_eigenvalues(np.diag(t), tol)
    projectors = tuple(spectral_projector(matrix, cluster, tol, sep_tol) for cluster in clusters)
    d = np.zeros_like(matrix)
    for cluster, projector in zip(clusters, projectors):
        d = d + cluster.center * projector
    n = matrix - d
    d.setflags(write=False)
    n.setflags(write=False)
    decomposition = JCDecomp(
        a=matrix, d=d, n=n, clusters=tuple(clusters), projectors=projectors, cluster_tol=tol
    )
    logger.info("jordan_chevalley: %d cluster(s) at cluster_tol %.3g", len(clusters), tol)
    residual = diagonalizability_residual(decomposition)
    if residual > get_settings().jc_tol:
        logger.warning("jordan_chevalley: diagonalizability residual %.3g exceeds jc_tol", residual)
    return decomposition


def diagonalizability_residual(jc: JCDecomp) -> float:
    m = jc.d.shape[0]
    worst = 0.0
    for cluster, projector in zip(jc.clusters, jc.projectors):
        shifted = (jc.d - cluster.center * np.eye(m)) @ projector
        worst = max(worst, float(np.linalg.norm(shifted, 2)))
    return _relative(worst, op_norm(jc.d))
