"""Brute-force evaluations of the trace and singular-value inequalities behind the limit.

Every ``check_*`` returns a :class:`CheckResult`; nothing here raises on a failed
inequality. ``run_suite`` draws seeded random instances and evaluates every family.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
import scipy.linalg

from powerlim.config import get_settings
from powerlim.errors import DomainError, RangeError
from powerlim.services.graded import graded_power
from powerlim.services.matcore import (
    PsdMatrix,
    abs_psd,
    as_hermitian,
    as_matrix,
    eigenvalues,
    op_norm,
    psd_from_spectrum,
    psd_power,
    schur,
)
from powerlim.services.yamamoto import iterate_limit
from powerlim.utils import as_vector

logger = logging.getLogger(__name__)

_BRUTE_FORCE_MAX_N = 512
_OVERFLOW_ENTRY = 1e150
_LIMIT_TRACE_TOL = 1e-2


@dataclass(frozen=True)
class CheckResult:
    name: str
    lhs: float
    rhs: float
    slack: float
    passed: bool
    context: dict[str, Any] = field(default_factory=dict)


def _result(
    name: str, lhs: float, rhs: float, context: dict[str, Any] | None = None, tol: float | None = None
) -> CheckResult:
    check_tol = get_settings().check_tol if tol is None else tol
    scale = max(1.0, abs(rhs))
    details = dict(context or {})
    details["scale"] = scale
    details["check_tol"] = check_tol
    return CheckResult(
        name=name,
        lhs=float(lhs),
        rhs=float(rhs),
        slack=float(rhs - lhs),
        passed=bool(lhs <= rhs + check_tol * scale),
        context=details,
    )


def _singular_values(matrix: np.ndarray) -> np.ndarray:
    return scipy.linalg.svdvals(matrix)


def _schatten(matrix: np.ndarray, p: float) -> float:
    """tr(|M|^p)."""
    return float(np.sum(_singular_values(matrix) ** p))


def _require_positive(p: float, name: str = "p") -> float:
    if not np.isfinite(p) or p <= 0:
        raise DomainError(f"{name} must be positive, got {p}")
    return float(p)


def check_weyl_perturbation(h1: Any, h2: Any) -> CheckResult:
    first = as_hermitian(h1).data
    second = as_hermitian(h2).data
    if first.shape != second.shape:
        raise DomainError(f"dimension mismatch: {first.shape} vs {second.shape}")
    lhs = float(np.max(np.abs(_singular_values(first) - _singular_values(second))))
    rhs = op_norm(first - second)
    return _result("weyl_perturbation", lhs, rhs, {"m": first.shape[0]})


def check_eig_trace_dominance(a: Any, p: float) -> CheckResult:
    matrix = as_matrix(a)
    p = _require_positive(p)
    lhs = float(np.sum(np.abs(eigenvalues(matrix)) ** p))
    return _result("eig_trace_dominance", lhs, _schatten(matrix, p), {"m": matrix.shape[0], "p": p})


def check_holder_trace(factors: Sequence[Any], exponents: Sequence[float], r: float) -> CheckResult:
    matrices = [as_matrix(factor) for factor in factors]
    if not matrices or len(matrices) != len(exponents):
        raise DomainError("need one exponent per factor")
    r = _require_positive(r, "r")
    powers = [_require_positive(p) for p in exponents]
    mismatch = abs(sum(1.0 / p for p in powers) - 1.0 / r)
    if mismatch > 1e-12:
        raise DomainError(f"exponents do not satisfy Σ 1/p_i = 1/r (off by {mismatch:.3g})")

    product = matrices[0]
    for matrix in matrices[1:]:
        product = product @ matrix
    lhs = _schatten(product, r) ** (1.0 / r)
    rhs = float(np.prod([_schatten(matrix, p) ** (1.0 / p) for matrix, p in zip(matrices, powers)]))
    return _result(
        "holder_trace",
        lhs,
        rhs,
        {"m": product.shape[0], "factors": len(matrices), "exponents": powers, "r": r},
    )


def check_three_factor(a: Any, b: Any, c: Any, p: float) -> CheckResult:
    left, middle, right = as_matrix(a), as_matrix(b), as_matrix(c)
    p = _require_positive(p)
    lhs = _schatten(left @ middle @ right, p)
    rhs = op_norm(left) ** p * op_norm(right) ** p * _schatten(middle, p)
    return _result("three_factor", lhs, rhs, {"m": left.shape[0], "p": p})


def check_power_trace_monotone(a: Any, p: float, n: int) -> CheckResult:
    """tr(|Aⁿ|^{p/n}) ≤ tr(|A|^p)."""
    matrix = as_matrix(a)
    p = _require_positive(p)
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    log_sv, _ = graded_power(matrix, n).singular_values(get_settings().grade_gap)
    lhs = float(np.sum(np.exp(p * log_sv / n)))
    return _result(
        "power_trace_monotone", lhs, _schatten(matrix, p), {"m": matrix.shape[0], "p": p, "n": n}
    )


def check_jensen_vector(a: Any, x: Any, alpha: float, n: int) -> CheckResult:
    """‖|Aⁿ|^α x‖ ≤ ‖Aⁿx‖^α for a unit vector x."""
    matrix = as_matrix(a)
    vector = as_vector(x, matrix.shape[0])
    if abs(np.linalg.norm(vector) - 1.0) > 1e-12:
        raise DomainError(f"x must be a unit vector, ‖x‖ = {np.linalg.norm(vector):.17g}")
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")

    power = np.linalg.matrix_power(matrix, n)
    if alpha == 0:
        lhs = float(np.linalg.norm(vector))
    else:
        lhs = float(np.linalg.norm(psd_power(abs_psd(power), alpha).data @ vector))
    rhs = float(np.linalg.norm(power @ vector)) ** alpha
    return _result("jensen_vector", lhs, rhs, {"m": matrix.shape[0], "alpha": alpha, "n": n})


def check_limit_trace_identity(a: Any, p: float, k: int | None = None) -> CheckResult:
    """|tr(H^p) − Σ|λ_i|^p| for H = |Aⁿ|^{1/n} at n = 2^K."""
    matrix = as_matrix(a)
    p = _require_positive(p)
    iterations = get_settings().iterations if k is None else k
    h = iterate_limit(matrix, iterations)
    target = float(np.sum(np.abs(eigenvalues(matrix)) ** p))
    lhs = abs(h.trace_power(p) - target)
    return _result(
        "limit_trace_identity",
        lhs,
        _LIMIT_TRACE_TOL * max(1.0, target),
        {"m": matrix.shape[0], "p": p, "K": iterations, "eigenvalue_sum": target},
        tol=0.0,
    )


def injected_violation() -> CheckResult:
    return _result("injected_violation", 1.0, 0.0, {"injected": True}, tol=0.0)


def graded_conjugation(a: Any, n: int) -> np.ndarray:
    """W_n T W_n^{-1} with W_n = diag(1, n, …, n^{m−1}); entry (i, j) becomes T(i, j)/n^{j−i}."""
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    t = as_matrix(a)
    if np.any(np.tril(t, -1) != 0):
        _, t = schur(t)
    weights = float(n) ** np.arange(t.shape[0], dtype=float)
    result = t * (weights[:, None] / weights[None, :])
    result.setflags(write=False)
    return result


def brute_force_limit(a: Any, n: int) -> PsdMatrix:
    """|Aⁿ|^{1/n} from n − 1 plain multiplications, for cross-checking the graded pipeline."""
    matrix = as_matrix(a)
    if not 1 <= n <= _BRUTE_FORCE_MAX_N:
        raise DomainError(f"brute force needs 1 ≤ n ≤ {_BRUTE_FORCE_MAX_N}, got {n}")
    product = np.array(matrix)
    for step in range(2, n + 1):
        product = product @ matrix
        if np.max(np.abs(product)) > _OVERFLOW_ENTRY:
            raise RangeError(
                f"A^{step} has entries above {_OVERFLOW_ENTRY:g}; prescale A to unit spectral radius"
            )
    absolute = abs_psd(product)
    if n == 1:
        return absolute
    return psd_from_spectrum(absolute.eigvals ** (1.0 / n), absolute.eigvecs)


def complex_gaussian(rng: np.random.Generator, m: int) -> np.ndarray:
    """Entries i.i.d. standard complex Gaussian (E|z|² = 1)."""
    return (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2.0)


def random_unitary(rng: np.random.Generator, m: int) -> np.ndarray:
    q, r = np.linalg.qr(complex_gaussian(rng, m))
    diagonal = np.diag(r)
    return q * (diagonal / np.abs(diagonal))[None, :]


def random_hermitian(rng: np.random.Generator, m: int) -> np.ndarray:
    g = complex_gaussian(rng, m)
    return (g + g.conj().T) / 2


def conjugated(rng: np.random.Generator, t: Any, max_cond: float = 100.0) -> np.ndarray:
    """S·T·S⁻¹ with cond(S) ≤ max_cond."""
    inner = np.asarray(t, dtype=np.complex128)
    m = inner.shape[0]
    sigma = np.geomspace(1.0, max(1.0, max_cond), m)
    s = random_unitary(rng, m) @ np.diag(sigma) @ random_unitary(rng, m)
    return s @ inner @ np.linalg.inv(s)


def jordan_matrix(values: Sequence[complex], block_sizes: Sequence[int]) -> np.ndarray:
    """Block diagonal Jordan matrix with one block of the given size per eigenvalue."""
    if len(values) != len(block_sizes):
        raise DomainError("need one block size per eigenvalue")
    blocks = []
    for value, size in zip(values, block_sizes):
        if size < 1:
            raise DomainError(f"block sizes must be positive, got {size}")
        block = complex(value) * np.eye(size, dtype=np.complex128) + np.eye(size, k=1)
        blocks.append(block)
    return scipy.linalg.block_diag(*blocks)


@dataclass(frozen=True)
class SuiteReport:
    seed: int
    instances: int
    dims: tuple[int, ...]
    results: tuple[CheckResult, ...]

    @property
    def failures(self) -> tuple[CheckResult, ...]:
        return tuple(result for result in self.results if not result.passed)

    @property
    def passed(self) -> bool:
        return not self.failures


def _unit(rng: np.random.Generator, m: int) -> np.ndarray:
    vector = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return vector / np.linalg.norm(vector)


def _weyl_family(rng: np.random.Generator, m: int, p_values: Sequence[float]) -> list[CheckResult]:
    h1 = random_hermitian(rng, m)
    return [check_weyl_perturbation(h1, h1 + random_hermitian(rng, m))]


def _dominance_family(rng: np.random.Generator, m: int, p_values: Sequence[float]) -> list[CheckResult]:
    a = complex_gaussian(rng, m)
    return [check_eig_trace_dominance(a, p) for p in p_values]


def _holder_family(rng: np.random.Generator, m: int, p_values: Sequence[float]) -> list[CheckResult]:
    pair = [complex_gaussian(rng, m) for _ in range(2)]
    triple = [complex_gaussian(rng, m) for _ in range(3)]
    return [
        check_holder_trace(pair, [2.0, 2.0], 1.0),
        check_holder_trace(triple, [3.0, 3.0, 3.0], 1.0),
    ]


def _three_factor_family(rng: np.random.Generator, m: int, p_values: Sequence[float]) -> list[CheckResult]:
    a, b, c = (complex_gaussian(rng, m) for _ in range(3))
    return [check_three_factor(a, b, c, p) for p in p_values]


def _monotone_family(rng: np.random.Generator, m: int, p_values: Sequence[float]) -> list[CheckResult]:
    a = complex_gaussian(rng, m)
    return [check_power_trace_monotone(a, p, n) for p in p_values for n in (2, 4, 8)]


def _jensen_family(rng: np.random.Generator, m: int, p_values: Sequence[float]) -> list[CheckResult]:
    a = complex_gaussian(rng, m)
    x = _unit(rng, m)
    return [check_jensen_vector(a, x, alpha, 4) for alpha in (0.0, 0.3, 0.7, 1.0)]


Family = Callable[[np.random.Generator, int, Sequence[float]], list[CheckResult]]

FAMILIES: dict[str, Family] = {
    "weyl_perturbation": _weyl_family,
    "eig_trace_dominance": _dominance_family,
    "holder_trace": _holder_family,
    "three_factor": _three_factor_family,
    "power_trace_monotone": _monotone_family,
    "jensen_vector": _jensen_family,
}


def run_suite(
    seed: int | None = None,
    instances: int | None = None,
    dims: Sequence[int] | None = None,
    p_values: Sequence[float] = (0.5, 1.0, 2.0),
    workers: int | None = None,
    inject_violation: bool = False,
) -> SuiteReport:
    """Evaluate every check family on seeded random instances.

    Each (family, instance) task draws from its own ``SeedSequence`` child, so the
    instances and the result order do not depend on ``workers``.
    """
    settings = get_settings()
    seed = settings.seed if seed is None else seed
    instances = settings.suite_instances if instances is None else instances
    dims = tuple(settings.suite_dims if dims is None else dims)
    workers = settings.suite_workers if workers is None else workers
    if not dims or min(dims) < 1:
        raise DomainError(f"suite dimensions must be positive, got {dims}")
    powers = [_require_positive(p) for p in p_values]

    tasks = [(name, family) for name, family in FAMILIES.items() for _ in range(instances)]
    children = np.random.SeedSequence(seed).spawn(len(tasks))

    def evaluate(index: int) -> list[CheckResult]:
        _, family = tasks[index]
        rng = np.random.default_rng(children[index])
        m = int(rng.choice(dims))
        return family(rng, m, powers)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        batches = list(pool.map(evaluate, range(len(tasks))))

    results = [result for batch in batches for result in batch]
    if inject_violation:
        results.append(injected_violation())
    report = SuiteReport(seed=seed, instances=instances, dims=dims, results=tuple(results))
    logger.info("run_suite: %d checks, %d failed (seed %d)", len(results), len(report.failures), seed)
    for failure in report.failures:
        logger.warning("check %s failed: lhs %.17g > rhs %.17g", failure.name, failure.lhs, failure.rhs)
    return report


def matrix_checks(a: Any, p_values: Sequence[float] = (0.5, 1.0, 2.0), k: int | None = None) -> list[CheckResult]:
    """The checks that apply to one given matrix."""
    matrix = as_matrix(a)
    results: list[CheckResult] = []
    for p in p_values:
        results.append(check_eig_trace_dominance(matrix, p))
        results.extend(check_power_trace_monotone(matrix, p, n) for n in (2, 4, 8))
        results.append(check_limit_trace_identity(matrix, p, k))
    return results
