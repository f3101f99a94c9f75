from __future__ import annotations

import csv
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from powerlim.main import run
from powerlim.storage.matrix_io import matrix_from_file
from powerlim.storage.schemas import MatrixFile

from builders import matrix_payload, write_json

SHEAR = [[2.0, 1.0], [0.0, 1.0]]


def _matrix(tmp_path, name, matrix):
    return str(write_json(tmp_path / name, matrix_payload(matrix)))


def _invoke(capsys, *argv):
    code = run([str(arg) for arg in argv])
    out = capsys.readouterr().out
    return code, json.loads(out)


def _as_array(payload) -> np.ndarray:
    return matrix_from_file(MatrixFile.model_validate(payload))


def test_analyze_shear(tmp_path, capsys):
    code, report = _invoke(capsys, "analyze", _matrix(tmp_path, "a.json", SHEAR))
    assert code == 0
    assert report["command"] == "analyze"
    assert report["iterations"] == 20
    assert report["flag"]["levels"] == pytest.approx([1.0, 2.0])
    assert_allclose(_as_array(report["h_closed_form"]), [[1.5, 0.5], [0.5, 1.5]], atol=1e-13)
    assert_allclose(_as_array(report["h_iterative"]), [[1.5, 0.5], [0.5, 1.5]], atol=1e-3)
    assert report["singular_value_limits"]["limits"] == pytest.approx([2.0, 1.0])
    assert len(report["singular_value_limits"]["series"][0]) == 20
    assert set(report["jc_residuals"]) == {
        "commutator",
        "nilpotency",
        "partition",
        "commutation",
        "diagonalizability",
    }


def test_analyze_zero_matrix(tmp_path, capsys):
    code, report = _invoke(capsys, "analyze", _matrix(tmp_path, "zero.json", np.zeros((2, 2))), "--K", "4")
    assert code == 0
    assert_allclose(_as_array(report["h_closed_form"]), np.zeros((2, 2)))
    assert_allclose(_as_array(report["h_iterative"]), np.zeros((2, 2)))


def test_analyze_with_growth_and_exp_sections(tmp_path, capsys):
    vectors = write_json(tmp_path / "v.json", [{"data": [[1, 0], [0, 0]]}])
    code, report = _invoke(
        capsys, "analyze", _matrix(tmp_path, "a.json", SHEAR), "--K", "10", "--vectors", vectors, "--exp"
    )
    assert code == 0
    assert report["growth"][0]["shell_index"] == 2
    assert report["growth"][0]["invariance"]["holds"] is True
    assert report["exp"]["iterations"] == 10
    assert report["exp"]["trajectories"][0]["shell_index"] == 2


def test_analyze_writes_series_csv(tmp_path, capsys):
    target = tmp_path / "series.csv"
    code, _ = _invoke(capsys, "analyze", _matrix(tmp_path, "a.json", SHEAR), "--K", "6", "--series", target)
    assert code == 0
    with target.open(newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["n", "s_1", "s_2"]
    assert [row[0] for row in rows[1:]] == ["2", "4", "8", "16", "32", "64"]


def test_nonsquare_file_exits_with_io_code(tmp_path, capsys):
    path = write_json(tmp_path / "wide.json", {"rows": 1, "cols": 2, "data": [[1, 0], [2, 0]]})
    code, error = _invoke(capsys, "analyze", path)
    assert code == 1
    assert error["error"] == "non_square"


def test_truncated_file_names_byte_offset(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"rows": 2, "cols": 2, "data": [[1, 0]', encoding="utf-8")
    code, error = _invoke(capsys, "analyze", path)
    assert code == 1
    assert error["error"] == "parse_error"
    assert "byte offset" in error["message"]
    assert error["offset"] is not None


def test_missing_file_exits_with_io_code(tmp_path, capsys):
    code, error = _invoke(capsys, "exp", tmp_path / "absent.json")
    assert code == 1
    assert error["path"].endswith("absent.json")


def test_ill_conditioned_cluster_exits_with_numerical_code(tmp_path, capsys):
    path = _matrix(tmp_path, "close.json", [[1.0, 1.0], [0.0, 1.0 + 1e-10]])
    code, error = _invoke(capsys, "analyze", path, "--tol-cluster", "1e-12", "--K", "4")
    assert code == 2
    assert error["error"] == "ill_conditioned_cluster"


def test_verify_small_suite_passes(capsys):
    code, report = _invoke(capsys, "verify", "--instances", "2", "--dims", "2-3")
    assert code == 0
    checks = report["checks"]
    assert checks["seed"] == 42
    assert checks["dims"] == [2, 3]
    assert checks["failed"] == 0
    assert checks["total"] > 0
    assert {entry["name"] for entry in checks["summary"]} >= {"weyl_perturbation", "jensen_vector"}


def test_verify_with_matrix_runs_matrix_checks(tmp_path, capsys):
    code, report = _invoke(
        capsys, "verify", _matrix(tmp_path, "a.json", SHEAR), "--instances", "1", "--dims", "2", "--p", "1", "2"
    )
    assert code == 0
    assert report["dimension"] == 2
    assert len(report["checks"]["matrix_checks"]) == 10


def test_verify_injected_violation_exits_with_verification_code(capsys):
    code, report = _invoke(capsys, "verify", "--instances", "1", "--dims", "2", "--inject-violation")
    assert code == 3
    failures = report["checks"]["failures"]
    assert [failure["name"] for failure in failures] == ["injected_violation"]


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--p", "0"],
        ["verify", "--dims", "0-2"],
        ["analyze"],
        ["frobnicate"],
        ["analyze", "a.json", "--K", "-1"],
    ],
)
def test_usage_errors_exit_64(capsys, argv):
    code, error = _invoke(capsys, *argv)
    assert code == 64
    assert error["error"] == "usage_error"


def test_growth_reports_zero_vector_as_error_entry(tmp_path, capsys):
    vectors = write_json(
        tmp_path / "v.json",
        [{"data": [[1, 0], [-1, 0]]}, {"data": [[0, 0], [0, 0]]}, {"data": [[1, 0], [0, 0]]}],
    )
    code, report = _invoke(capsys, "growth", _matrix(tmp_path, "a.json", SHEAR), vectors, "--K", "10")
    assert code == 0
    first, zero, last = report["growth"]
    assert first["shell_index"] == 1
    assert first["exponent"] == pytest.approx(1.0)
    assert zero["error"]["error"] == "domain_error"
    assert last["shell_index"] == 2
    assert last["exponent"] == pytest.approx(2.0)
    assert last["series"][-1]["value"] == pytest.approx(2.0, abs=1e-2)


def test_growth_with_empty_vectors_file_is_a_usage_error(tmp_path, capsys):
    vectors = write_json(tmp_path / "v.json", [])
    code, error = _invoke(capsys, "growth", _matrix(tmp_path, "a.json", SHEAR), vectors)
    assert code == 64
    assert error["error"] == "usage_error"


@pytest.mark.parametrize(
    "matrix, expected",
    [
        (np.diag([1.0, -1.0]), np.diag([np.e, 1.0 / np.e])),
        (np.array([[0.0, -1.0], [1.0, 0.0]]), np.eye(2)),
    ],
)
def test_exp_limits(tmp_path, capsys, matrix, expected):
    code, report = _invoke(capsys, "exp", _matrix(tmp_path, "a.json", matrix))
    assert code == 0
    assert_allclose(_as_array(report["exp"]["limit"]), expected, atol=1e-12)
    assert_allclose(_as_array(report["exp"]["iterative"]), expected, atol=1e-6)


def test_exp_saddle_matches_closed_form(tmp_path, capsys):
    code, report = _invoke(capsys, "exp", _matrix(tmp_path, "a.json", [[1.0, 1.0], [0.0, -1.0]]))
    assert code == 0
    v = np.array([1.0, -2.0])
    f1 = np.outer(v, v) / 5.0
    expected = np.exp(-1.0) * f1 + np.e * (np.eye(2) - f1)
    assert_allclose(_as_array(report["exp"]["limit"]), expected, atol=1e-12)
    assert report["exp"]["realpart_flag"]["levels"] == pytest.approx([-1.0, 1.0])


def test_reports_are_byte_identical(tmp_path, capsys):
    path = _matrix(tmp_path, "a.json", [[0.5, 2.0, 0.0], [0.0, -1.0, 1.0], [1.0, 0.0, 0.25]])
    run(["analyze", path, "--K", "8", "--exp"])
    first = capsys.readouterr().out
    run(["analyze", path, "--K", "8", "--exp"])
    second = capsys.readouterr().out
    assert first == second
