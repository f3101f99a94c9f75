from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose

from powerlim.services.graded import (
    _regrade,
    graded_from_matrix,
    graded_power,
    graded_product,
    graded_square,
)
from powerlim.services.oracle import complex_gaussian, conjugated

entries = st.floats(-2.0, 2.0, allow_nan=False, allow_subnormal=False)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (3, 3), elements=entries), st.integers(1, 12))
def test_graded_power_matches_matrix_power(values, n):
    expected = np.linalg.matrix_power(values, n)
    scale = max(1.0, float(np.linalg.norm(values, 2))) ** n
    assert_allclose(graded_power(values, n).to_matrix(), expected, rtol=0, atol=1e-9 * scale)


def test_graded_power_exponent_and_frame(rng):
    a = complex_gaussian(rng, 4)
    power = graded_power(a, 13)
    assert power.exponent == 13
    assert_allclose(power.frame.conj().T @ power.frame, np.eye(4), atol=1e-12)
    assert_allclose(np.linalg.norm(power.coframe, axis=1), np.ones(4), atol=1e-12)
    assert np.all(np.diff(power.log_grades) <= 0)


def test_graded_product_of_two_powers(rng):
    a = complex_gaussian(rng, 3)
    product = graded_product(graded_power(a, 3), graded_power(a, 4))
    assert product.exponent == 7
    expected = np.linalg.matrix_power(a, 7)
    assert_allclose(product.to_matrix(), expected, atol=1e-10 * np.linalg.norm(a, 2) ** 7)


def test_graded_power_rejects_zero_exponent():
    with pytest.raises(ValueError):
        graded_power(np.eye(2), 0)


def test_graded_singular_values_match_svdvals(rng):
    a = complex_gaussian(rng, 5)
    log_sv, vectors = graded_from_matrix(a).singular_values(36.0)
    assert_allclose(np.exp(log_sv), scipy.linalg.svdvals(a), rtol=1e-10)
    assert_allclose(vectors.conj().T @ vectors, np.eye(5), atol=1e-12)


def test_shear_singular_values_at_large_exponent():
    n_log = 20
    power = graded_power(np.array([[2.0, 1.0], [0.0, 1.0]]), 2**n_log)
    log_sv, _ = power.singular_values(36.0)
    assert_allclose(log_sv / 2**n_log, [np.log(2.0), 0.0], atol=1e-6)


@pytest.mark.parametrize("k", [10, 11, 20])
def test_squaring_past_double_range_stays_finite(k):
    power = graded_from_matrix(np.array([[2.0, 1.0], [0.0, 1.0]]))
    with np.errstate(over="raise", invalid="raise"):
        for _ in range(k):
            power = graded_square(power)
    assert power.exponent == 2**k
    assert power.log_grades[0] == pytest.approx(2**k * np.log(2.0), rel=1e-12)
    assert np.all(np.isfinite(power.frame))
    assert np.all(np.isfinite(power.coframe))


def test_regrade_ignores_entries_below_the_diagonal():
    spread = np.array([1000.0, 0.0, -1000.0])
    triangular = np.triu(np.ones((3, 3)))
    with np.errstate(over="raise", invalid="raise"):
        regraded = _regrade(triangular, spread)
    assert np.all(np.tril(regraded, -1) == 0)
    assert_allclose(np.diag(regraded), np.ones(3))
    assert regraded[0, 1] == pytest.approx(np.exp(-1000.0))


def test_regrade_zeroes_null_rows():
    regraded = _regrade(np.triu(np.ones((2, 2))), np.array([0.0, -np.inf]))
    assert_allclose(regraded, [[1.0, 0.0], [0.0, 0.0]])


def test_non_normal_power_keeps_small_singular_value(rng):
    a, _ = _diag_conjugate(rng, [2.0, 0.5])
    n = 2**30
    log_sv, vectors = graded_power(a, n).singular_values(36.0)
    assert_allclose(log_sv / n, [np.log(2.0), np.log(0.5)], atol=1e-6)
    assert np.all(np.isfinite(log_sv))
    assert_allclose(vectors.conj().T @ vectors, np.eye(2), atol=1e-10)


def test_zero_matrix_power_is_zero():
    power = graded_power(np.zeros((3, 3)), 5)
    assert power.is_zero
    assert np.all(power.to_matrix() == 0)
    log_sv, _ = power.singular_values(36.0)
    assert np.all(np.isneginf(log_sv))
    log_scale, base = power.scale_and_base()
    assert log_scale == float("-inf")
    assert np.all(base == 0)


def test_nilpotent_square_vanishes():
    shift = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert not graded_power(shift, 1).is_zero
    assert graded_power(shift, 2).is_zero


def test_log_norm_of_vector():
    power = graded_power(np.diag([2.0, 0.5]), 10)
    assert power.log_norm_of(np.array([0.0, 1.0])) == pytest.approx(10 * np.log(0.5))
    assert power.log_norm_of(np.array([1.0, 0.0])) == pytest.approx(10 * np.log(2.0))
    assert power.log_norm_of(np.zeros(2)) == float("-inf")


def test_times_and_scale_and_base(rng):
    a = complex_gaussian(rng, 3)
    b = complex_gaussian(rng, 3)
    power = graded_power(a, 5)
    expected = np.linalg.matrix_power(a, 5) @ b
    scale = np.linalg.norm(a, 2) ** 5 * np.linalg.norm(b, 2)
    assert_allclose(power.times(b).to_matrix(), expected, atol=1e-10 * scale)

    log_scale, base = power.scale_and_base()
    assert np.linalg.norm(base, 2) == pytest.approx(1.0)
    assert_allclose(np.exp(log_scale) * base, np.linalg.matrix_power(a, 5), atol=1e-10 * scale)


def _diag_conjugate(rng: np.random.Generator, values: list[float]) -> tuple[np.ndarray, np.ndarray]:
    t = np.diag(np.asarray(values, dtype=np.complex128))
    return conjugated(rng, t, max_cond=10.0), t
