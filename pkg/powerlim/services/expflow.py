from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
import scipy.linalg
from numpy.linalg import LinAlgError

from powerlim.config import get_settings
from powerlim.errors import DomainError, InternalError
from powerlim.services.matcore import PsdMatrix, as_matrix, op_norm, power_ladder, scaled_power
from powerlim.services.yamamoto import ProjectionFlag, build_flag, iterate_limit, root_of_power
from powerlim.utils import nonzero_vector

logger = logging.getLogger(__name__)

# diagonal [13/13] rational approximant of exp
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_NORM_THRESHOLD = 0.5


def expm(a: Any) -> np.ndarray:
    """e^A by scaling and squaring around a fixed degree-13 approximant."""
    matrix = as_matrix(a)
    norm = op_norm(matrix)
    squarings = 0
    if norm > _NORM_THRESHOLD:
        squarings = int(np.ceil(np.log2(norm / _NORM_THRESHOLD)))
        while norm / 2.0**squarings > _NORM_THRESHOLD:
            squarings += 1
    scaled = matrix / 2.0**squarings

    b = _PADE13
    ident = np.eye(matrix.shape[0], dtype=np.complex128)
    a2 = scaled @ scaled
    a4 = a2 @ a2
    a6 = a4 @ a2
    u = scaled @ (
        a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident
    )
    v = a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident
    try:
        result = scipy.linalg.solve(v - u, v + u)
    except LinAlgError as exc:
        raise InternalError(f"expm: approximant denominator is singular ({exc})") from exc
    for _ in range(squarings):
        result = result @ result
    result.setflags(write=False)
    return result


@dataclass(frozen=True)
class RealPartFlag(ProjectionFlag):
    @property
    def realparts(self) -> tuple[float, ...]:
        return self.levels


def realpart_flag(a: Any, cluster_tol: float | None = None) -> RealPartFlag:
    flag = build_flag(a, lambda value: value.real, RealPartFlag, cluster_tol)
    logger.info("realpart_flag: real parts %s with multiplicities %s", flag.realparts, flag.multiplicities)
    return flag


def exp_limit_matrix(a: Any, cluster_tol: float | None = None) -> PsdMatrix:
    """lim |e^{tA}|^{1/t} = Σ_j e^{h_j}(F_j − F_{j−1})."""
    flag = realpart_flag(a, cluster_tol)
    return flag.combination([float(np.exp(h)) for h in flag.realparts])


def exp_iterate_limit(a: Any, k: int) -> PsdMatrix:
    return iterate_limit(expm(a), k)


@dataclass(frozen=True)
class BoundWitness:
    rho: float
    omega: float
    times: tuple[float, ...]
    log_norms: tuple[float, ...]
    rates: tuple[float, ...]
    lower_constant: float
    upper_constant: float


@dataclass(frozen=True)
class TrajectoryReport:
    initial: np.ndarray
    shell_index: int
    growth_base: float
    witness: BoundWitness


def _shell_basis(flag: RealPartFlag, shell: int) -> np.ndarray:
    projection = flag.projections[shell - 1]
    return projection.eigvecs[:, projection.eigvals > 0.5]


def trajectory_growth(
    a: Any,
    x0: Any,
    cluster_tol: float | None = None,
    mem_tol: float | None = None,
    levels: int | None = None,
) -> TrajectoryReport:
    """Classify X(t) = e^{tA}x0 by its real-part shell and sample it on t = 1, 2, 4, …"""
    matrix = as_matrix(a)
    vector = nonzero_vector(x0, matrix.shape[0])
    settings = get_settings()
    levels = settings.trajectory_levels if levels is None else levels
    flag = realpart_flag(matrix, cluster_tol)
    shell = flag.shell_of(vector, mem_tol)
    h = flag.realparts[shell - 1]
    spread = flag.realparts[-1] - flag.realparts[0]
    margin = settings.witness_margin * max(1.0, spread)
    rho, omega = h - margin, h + margin

    # ran(F_shell) is A-invariant; the trajectory never leaves it
    basis = _shell_basis(flag, shell)
    restricted = basis.conj().T @ matrix @ basis
    start = basis.conj().T @ vector
    x_log_norm = float(np.log(np.linalg.norm(vector)))

    times = [0.0]
    log_norms = [float(np.log(np.linalg.norm(start)))]
    for power in power_ladder(expm(restricted), levels):
        times.append(float(power.exponent))
        log_norms.append(power.graded.log_norm_of(start))
    t = np.array(times)
    relative = np.array(log_norms) - x_log_norm
    rates = tuple(float(value) for value in relative[1:] / t[1:])
    witness = BoundWitness(
        rho=rho,
        omega=omega,
        times=tuple(times),
        log_norms=tuple(log_norms),
        rates=rates,
        lower_constant=float(np.exp(np.min(relative - rho * t))),
        upper_constant=float(np.exp(np.max(relative - omega * t))),
    )
    logger.debug("trajectory_growth: shell %d, h = %.6g, last rate %.6g", shell, h, rates[-1])
    return TrajectoryReport(
        initial=vector, shell_index=shell, growth_base=float(np.exp(h)), witness=witness
    )


@dataclass(frozen=True)
class FlowStep:
    time: float
    shell_index: int
    norm: float


@dataclass(frozen=True)
class FlowInvarianceTrace:
    holds: bool
    initial_shell: int
    steps: tuple[FlowStep, ...]


def trajectory_shell_invariance(
    a: Any,
    x0: Any,
    s_grid: Sequence[float],
    cluster_tol: float | None = None,
    mem_tol: float | None = None,
) -> FlowInvarianceTrace:
    matrix = as_matrix(a)
    vector = nonzero_vector(x0, matrix.shape[0])
    flag = realpart_flag(matrix, cluster_tol)
    initial = flag.shell_of(vector, mem_tol)
    steps = []
    for s in s_grid:
        if s < 0:
            raise DomainError(f"flow times must be non-negative, got {s}")
        moved = expm(s * matrix) @ vector
        steps.append(
            FlowStep(time=float(s), shell_index=flag.shell_of(moved, mem_tol), norm=float(np.linalg.norm(moved)))
        )
    holds = all(step.shell_index == initial for step in steps)
    return FlowInvarianceTrace(holds=holds, initial_shell=initial, steps=tuple(steps))


@dataclass(frozen=True)
class InterpolationBounds:
    n: int
    alpha: float
    c: float
    big_c: float
    h_n: PsdMatrix
    h_shifted: PsdMatrix
    upper_gap: float
    lower_gap: float

    def holds(self, tol: float = 1e-8) -> bool:
        scale = max(1.0, float(np.max(self.h_n.eigvals)))
        return self.upper_gap >= -tol * scale and self.lower_gap >= -tol * scale


def interpolation_bounds(a: Any, k: int, alpha: float, samples: int = 257) -> InterpolationBounds:
    """c^{1/n}|e^{nA}|^{1/n} ≤ |e^{(n+α)A}|^{1/n} ≤ C^{1/n}|e^{nA}|^{1/n} at n = 2^K."""
    matrix = as_matrix(a)
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    grid = np.unique(np.concatenate([np.linspace(0.0, 1.0, samples), [alpha]]))
    c = min(1.0 / op_norm(expm(-t * matrix)) for t in grid)
    big_c = max(op_norm(expm(t * matrix)) for t in grid)

    power = scaled_power(expm(matrix), k).graded
    n = power.exponent
    h_n = root_of_power(power)
    h_shifted = root_of_power(power.times(expm(alpha * matrix)), n)
    upper_gap = float(np.linalg.eigvalsh(big_c ** (1.0 / n) * h_n.data - h_shifted.data)[0])
    lower_gap = float(np.linalg.eigvalsh(h_shifted.data - c ** (1.0 / n) * h_n.data)[0])
    return InterpolationBounds(
        n=n,
        alpha=alpha,
        c=c,
        big_c=big_c,
        h_n=h_n,
        h_shifted=h_shifted,
        upper_gap=upper_gap,
        lower_gap=lower_gap,
    )
