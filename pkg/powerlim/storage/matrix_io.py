from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from pydantic import TypeAdapter, ValidationError

from powerlim.errors import MatrixFileError, NonFiniteError, NonSquareError, UsageError
from powerlim.storage.schemas import AnalysisReport, MatrixFile, VectorEntry

logger = logging.getLogger(__name__)

_vector_list = TypeAdapter(list[VectorEntry])


def _read_bytes(path: str | Path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise MatrixFileError(f"cannot read file: {exc.strerror or exc}", path=str(path)) from exc


def _decode(raw: bytes, path: str | Path) -> str:
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MatrixFileError("file is not valid UTF-8", path=str(path), offset=exc.start) from exc


def _byte_offset(text: str, position: int) -> int:
    return len(text[:position].encode("utf-8"))


def _load_json(text: str, path: str | Path) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFileError(
            f"invalid JSON: {exc.msg}",
            path=str(path),
            line=exc.lineno,
            offset=_byte_offset(text, exc.pos),
        ) from exc


def matrix_from_file(payload: MatrixFile, path: str | Path | None = None) -> np.ndarray:
    location = str(path) if path is not None else None
    if payload.rows != payload.cols:
        raise NonSquareError(f"matrix is {payload.rows}×{payload.cols}, expected square", path=location)
    values = np.array(payload.data, dtype=float).reshape(payload.rows * payload.cols, 2)
    if not np.all(np.isfinite(values)):
        index = int(np.flatnonzero(~np.all(np.isfinite(values), axis=1))[0])
        raise NonFiniteError(
            f"entry ({index // payload.cols}, {index % payload.cols}) is not finite", path=location
        )
    matrix = (values[:, 0] + 1j * values[:, 1]).reshape(payload.rows, payload.cols)
    matrix.setflags(write=False)
    return matrix


def matrix_to_file(matrix: Any) -> MatrixFile:
    array = np.asarray(matrix, dtype=np.complex128)
    rows, cols = array.shape
    data = [(float(value.real), float(value.imag)) for value in array.reshape(-1)]
    return MatrixFile(rows=rows, cols=cols, data=data)


def _parse_json_matrix(text: str, path: str | Path) -> np.ndarray:
    try:
        payload = MatrixFile.model_validate(_load_json(text, path))
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first.get("loc", ())) or "document"
        raise MatrixFileError(f"invalid matrix file at {where}: {first.get('msg')}", path=str(path)) from exc
    return matrix_from_file(payload, path)


def _parse_text_matrix(text: str, path: str | Path) -> np.ndarray:
    """First line ``m m``, then m lines of 2m reals (re im pairs)."""
    location = str(path)
    lines: list[tuple[int, int, list[str]]] = []
    offset = 0
    for number, line in enumerate(text.splitlines(keepends=True), start=1):
        tokens = line.split()
        if tokens:
            lines.append((number, offset, tokens))
        offset += len(line.encode("utf-8"))
    end = len(text.encode("utf-8"))
    if not lines:
        raise MatrixFileError("empty matrix file", path=location, offset=0)

    number, start, header = lines[0]
    try:
        rows, cols = (int(token) for token in header)
    except ValueError as exc:
        raise MatrixFileError(
            "header must be two integers 'rows cols'", path=location, line=number, offset=start
        ) from exc
    if rows < 1 or cols < 1:
        raise MatrixFileError("matrix dimensions must be positive", path=location, line=number, offset=start)
    if rows != cols:
        raise NonSquareError(f"matrix is {rows}×{cols}, expected square", path=location, line=number)

    body = lines[1:]
    if len(body) < rows:
        raise MatrixFileError(
            f"file ended after {len(body)} of {rows} matrix rows", path=location, offset=end
        )
    if len(body) > rows:
        number, start, _ = body[rows]
        raise MatrixFileError("unexpected data after the last matrix row", path=location, line=number, offset=start)

    matrix = np.zeros((rows, cols), dtype=np.complex128)
    for i, (number, start, tokens) in enumerate(body):
        if len(tokens) != 2 * cols:
            raise MatrixFileError(
                f"row {i} has {len(tokens)} values, expected {2 * cols}",
                path=location,
                line=number,
                offset=start,
            )
        try:
            values = [float(token) for token in tokens]
        except ValueError as exc:
            raise MatrixFileError(f"row {i}: {exc}", path=location, line=number, offset=start) from exc
        if not all(math.isfinite(value) for value in values):
            raise NonFiniteError(f"row {i} has a non-finite entry", path=location, line=number, offset=start)
        matrix[i] = np.array(values[0::2]) + 1j * np.array(values[1::2])
    matrix.setflags(write=False)
    return matrix


def load_matrix(path: str | Path) -> np.ndarray:
    text = _decode(_read_bytes(path), path)
    if text.lstrip().startswith("{"):
        matrix = _parse_json_matrix(text, path)
    else:
        matrix = _parse_text_matrix(text, path)
    logger.debug("Loaded %d×%d matrix from %s", matrix.shape[0], matrix.shape[1], path)
    return matrix


def save_matrix(path: str | Path, matrix: Any, fmt: str = "json") -> None:
    payload = matrix_to_file(matrix)
    target = Path(path)
    if fmt == "json":
        target.write_text(json.dumps(payload.model_dump(), indent=2) + "\n", encoding="utf-8")
        return
    if fmt != "text":
        raise ValueError(f"unknown matrix format {fmt!r}")
    lines = [f"{payload.rows} {payload.cols}"]
    for i in range(payload.rows):
        row = payload.data[i * payload.cols : (i + 1) * payload.cols]
        lines.append(" ".join(f"{re!r} {im!r}" for re, im in row))
    target.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_vectors(path: str | Path, m: int | None = None) -> list[np.ndarray]:
    """Vectors file: JSON list of ``{"data": [[re, im], ...]}``."""
    text = _decode(_read_bytes(path), path)
    try:
        entries = _vector_list.validate_python(_load_json(text, path))
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first.get("loc", ())) or "document"
        raise MatrixFileError(f"invalid vectors file at {where}: {first.get('msg')}", path=str(path)) from exc
    if not entries:
        raise UsageError(f"vectors file {path} contains no vectors")

    vectors = []
    for index, entry in enumerate(entries):
        values = np.array(entry.data, dtype=float).reshape(-1, 2)
        if m is not None and values.shape[0] != m:
            raise MatrixFileError(
                f"vector {index} has length {values.shape[0]}, expected {m}", path=str(path)
            )
        if not np.all(np.isfinite(values)):
            raise NonFiniteError(f"vector {index} has a non-finite entry", path=str(path))
        vectors.append(values[:, 0] + 1j * values[:, 1])
    return vectors


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else ""
    return str(value)


def write_series_csv(path: str | Path, columns: dict[str, Sequence[Any]]) -> None:
    """One column per series; the first column is expected to be ``n``."""
    names = list(columns)
    length = max((len(values) for values in columns.values()), default=0)
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(names)
        for i in range(length):
            writer.writerow(
                [_cell(columns[name][i]) if i < len(columns[name]) else "" for name in names]
            )


def _sanitize(value: Any) -> Any:
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {key: _sanitize(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(item) for item in value]
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return _sanitize(value.item())
    if isinstance(value, complex):
        return [_sanitize(value.real), _sanitize(value.imag)]
    return value


def report_json(report: AnalysisReport) -> str:
    payload = _sanitize(report.model_dump(exclude_none=True))
    return json.dumps(payload, indent=2, ensure_ascii=False, allow_nan=False)


def matrix_digest(matrix: Any) -> str:
    """sha256 of the canonical JSON serialization."""
    canonical = json.dumps(matrix_to_file(matrix).model_dump(), separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
