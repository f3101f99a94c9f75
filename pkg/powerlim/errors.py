from __future__ import annotations

from typing import Any, Sequence

EXIT_OK = 0
EXIT_IO = 1
EXIT_NUMERICAL = 2
EXIT_VERIFICATION = 3
EXIT_USAGE = 64


class PowerLimError(Exception):
    exit_code = EXIT_NUMERICAL
    kind = "error"

    def to_dict(self) -> dict[str, Any]:
        return {"error": self.kind, "message": str(self)}


class FactorizationError(PowerLimError):
    kind = "factorization_failure"

    def __init__(self, operation: str, iterations: int, detail: str = "") -> None:
        self.operation = operation
        self.iterations = iterations
        message = f"{operation} did not converge within {iterations} sweeps"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)

    def to_dict(self) -> dict[str, Any]:
        data = super().to_dict()
        data.update(operation=self.operation, iterations=self.iterations)
        return data


class SeparationError(PowerLimError):
    kind = "near_singular_separation"

    def __init__(self, pair: tuple[complex, complex], gap: float, sep_tol: float) -> None:
        self.pair = pair
        self.gap = gap
        self.sep_tol = sep_tol
        super().__init__(
            f"eigenvalues {pair[0]:.6g} and {pair[1]:.6g} are separated by {gap:.3g} "
            f"(below sep_tol {sep_tol:.3g})"
        )


class IllConditionedClusterError(PowerLimError):
    kind = "ill_conditioned_cluster"

    def __init__(self, center: complex, cluster_tol: float, cause: SeparationError) -> None:
        self.center = center
        self.cluster_tol = cluster_tol
        self.cause = cause
        super().__init__(
            f"cluster at {center:.6g} is not separated from the rest of the spectrum "
            f"({cause}); retry with a cluster_tol larger than {cluster_tol:.3g}"
        )


class ClusteringError(PowerLimError):
    kind = "clustering_mismatch"


class DomainError(PowerLimError, ValueError):
    kind = "domain_error"


class RangeError(PowerLimError, OverflowError):
    kind = "range_error"


class InternalError(PowerLimError):
    kind = "internal_error"


class MatrixFileError(PowerLimError):
    exit_code = EXIT_IO
    kind = "parse_error"

    def __init__(
        self,
        message: str,
        *,
        path: str | None = None,
        line: int | None = None,
        offset: int | None = None,
    ) -> None:
        self.path = path
        self.line = line
        self.offset = offset
        location = []
        if path:
            location.append(str(path))
        if line is not None:
            location.append(f"line {line}")
        if offset is not None:
            location.append(f"byte offset {offset}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)

    def to_dict(self) -> dict[str, Any]:
        data = super().to_dict()
        data.update(path=self.path, line=self.line, offset=self.offset)
        return data


class NonSquareError(MatrixFileError):
    kind = "non_square"


class NonFiniteError(MatrixFileError):
    kind = "non_finite"


class VerificationFailure(PowerLimError):
    exit_code = EXIT_VERIFICATION
    kind = "verification_failure"

    def __init__(self, failures: Sequence[Any]) -> None:
        self.failures = list(failures)
        names = ", ".join(sorted({getattr(item, "name", "?") for item in self.failures}))
        super().__init__(f"{len(self.failures)} check(s) failed: {names}")


class UsageError(PowerLimError):
    exit_code = EXIT_USAGE
    kind = "usage_error"
