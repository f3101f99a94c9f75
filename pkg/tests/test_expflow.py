from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg
from numpy.testing import assert_allclose

from powerlim.config import CliSettings, set_settings
from powerlim.errors import DomainError
from powerlim.services.expflow import (
    exp_iterate_limit,
    exp_limit_matrix,
    expm,
    interpolation_bounds,
    realpart_flag,
    trajectory_growth,
    trajectory_shell_invariance,
)
from powerlim.services.oracle import complex_gaussian, random_hermitian
from powerlim.services.yamamoto import modulus_flag

from builders import max_angle, range_basis, realpart_separated_matrix

SADDLE = np.array([[1.0, 1.0], [0.0, -1.0]])
DIAG = np.diag([1.0, -1.0])
ROTATION = np.array([[0.0, -1.0], [1.0, 0.0]])
E1 = np.array([1.0, 0.0])
E2 = np.array([0.0, 1.0])
STABLE = np.array([1.0, -2.0]) / np.sqrt(5.0)


def _saddle_f1() -> np.ndarray:
    v = np.array([1.0, -2.0])
    return np.outer(v, v) / 5.0


def test_expm_of_diagonal():
    result = expm(np.diag([1.0, -2.0]))
    assert_allclose(np.diag(result), [np.e, np.exp(-2.0)], rtol=1e-12)
    assert abs(result[0, 1]) < 1e-15 and abs(result[1, 0]) < 1e-15


def test_expm_of_nilpotent_truncates():
    shift = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert_allclose(expm(shift), np.eye(2) + shift, atol=1e-14)


def test_expm_of_zero_is_identity():
    assert_allclose(expm(np.zeros((3, 3))), np.eye(3))


def test_expm_inverse_pair(rng):
    a = complex_gaussian(rng, 4)
    assert_allclose(expm(a) @ expm(-a), np.eye(4), atol=1e-10)


def test_expm_semigroup(rng):
    a = complex_gaussian(rng, 4)
    a = 2.0 * a / np.linalg.norm(a, 2)
    once = expm(a)
    twice = expm(2.0 * a)
    assert_allclose(once @ once, twice, atol=1e-9 * np.linalg.norm(twice, 2))


def test_expm_matches_reference(rng):
    a = complex_gaussian(rng, 5)
    reference = scipy.linalg.expm(a)
    assert_allclose(expm(a), reference, atol=1e-10 * np.linalg.norm(reference, 2))


def test_expm_of_skew_hermitian_is_unitary(rng):
    u = expm(1j * random_hermitian(rng, 4))
    assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-12)


def test_realpart_flag_of_diagonal():
    flag = realpart_flag(np.diag([-1.0, 7.0j, 2.0]))
    assert flag.realparts == pytest.approx((-1.0, 0.0, 2.0))
    assert_allclose(flag.level(1), np.diag([1.0, 0.0, 0.0]), atol=1e-14)
    assert_allclose(flag.level(2), np.diag([1.0, 1.0, 0.0]), atol=1e-14)
    assert_allclose(flag.level(3), np.eye(3), atol=1e-14)


def test_realpart_flag_single_vertical_line():
    flag = realpart_flag(np.diag([1.0 + 1.0j, 1.0 - 2.0j, 1.0]))
    assert flag.k == 1
    assert_allclose(flag.level(1), np.eye(3))


def test_realpart_flag_of_saddle():
    flag = realpart_flag(SADDLE)
    assert flag.realparts == pytest.approx((-1.0, 1.0))
    assert_allclose(flag.level(1), _saddle_f1(), atol=1e-14)


@pytest.mark.parametrize(
    "matrix, expected",
    [
        (DIAG, np.diag([np.e, 1.0 / np.e])),
        (ROTATION, np.eye(2)),
        (SADDLE, np.exp(-1.0) * _saddle_f1() + np.e * (np.eye(2) - _saddle_f1())),
    ],
)
def test_exp_limit_matrix_examples(matrix, expected):
    assert_allclose(exp_limit_matrix(matrix).data, expected, atol=1e-13)


def test_exp_iterate_limit_examples(rng):
    assert_allclose(exp_iterate_limit(1j * random_hermitian(rng, 3), 8).data, np.eye(3), atol=1e-10)
    assert_allclose(exp_iterate_limit(DIAG, 6).data, np.diag([np.e, 1.0 / np.e]), atol=1e-12)
    closed = exp_limit_matrix(SADDLE).data
    assert np.linalg.norm(exp_iterate_limit(SADDLE, 20).data - closed, 2) <= 1e-2


@pytest.mark.parametrize(
    "matrix, x0, shell, exponent",
    [
        (DIAG, E2, 1, -1.0),
        (DIAG, E1 + E2, 2, 1.0),
        (SADDLE, STABLE, 1, -1.0),
        (SADDLE, E1, 2, 1.0),
    ],
)
def test_trajectory_growth_classifies_shells(matrix, x0, shell, exponent):
    report = trajectory_growth(matrix, x0)
    assert report.shell_index == shell
    assert report.growth_base == pytest.approx(np.exp(exponent))

    witness = report.witness
    assert witness.rho < exponent < witness.omega
    assert witness.times[0] == 0.0
    assert witness.times[-1] == 2.0**10
    late = [rate for t, rate in zip(witness.times[1:], witness.rates) if t >= 64]
    assert late
    assert all(abs(rate - exponent) < 0.1 for rate in late)
    assert 0 < witness.lower_constant <= 1.0 + 1e-12
    assert witness.upper_constant >= 1.0 - 1e-12


def test_witness_brackets_exponent_with_zero_margin_setting():
    set_settings(CliSettings(witness_margin=0.0))
    witness = trajectory_growth(DIAG, E1).witness
    assert witness.rho < 1.0 < witness.omega


def test_trajectory_witness_bounds_hold_on_grid():
    witness = trajectory_growth(SADDLE, E1 + E2).witness
    norm = np.log(np.sqrt(2.0))
    for t, log_norm in zip(witness.times, witness.log_norms):
        relative = log_norm - norm
        assert np.log(witness.lower_constant) + witness.rho * t <= relative + 1e-9
        assert relative <= np.log(witness.upper_constant) + witness.omega * t + 1e-9


def test_trajectory_growth_rejects_zero_vector():
    with pytest.raises(DomainError):
        trajectory_growth(SADDLE, np.zeros(2))


def test_trajectory_shell_invariance_examples():
    diagonal = trajectory_shell_invariance(DIAG, E1 + E2, [0.5, 1.0, 2.0, 4.0])
    assert diagonal.holds
    assert [step.shell_index for step in diagonal.steps] == [2, 2, 2, 2]

    saddle = trajectory_shell_invariance(SADDLE, E1, [1.0, 2.0, 3.0])
    assert saddle.holds
    assert saddle.initial_shell == 2

    eigen = trajectory_shell_invariance(SADDLE, STABLE, [0.0, 1.0, 5.0])
    assert eigen.holds
    assert eigen.initial_shell == 1
    assert eigen.steps[-1].norm == pytest.approx(np.exp(-5.0))


def test_trajectory_shell_invariance_rejects_negative_time():
    with pytest.raises(DomainError):
        trajectory_shell_invariance(DIAG, E1, [1.0, -1.0])


@pytest.mark.parametrize("alpha", [0.25, 0.5])
def test_interpolation_bounds_hold_between_integer_times(alpha):
    bounds = interpolation_bounds(SADDLE, 4, alpha)
    assert bounds.n == 16
    assert bounds.c <= 1.0 <= bounds.big_c
    assert bounds.holds()


def test_interpolation_bounds_reject_bad_alpha():
    with pytest.raises(DomainError):
        interpolation_bounds(SADDLE, 3, 1.5)


def test_realpart_flag_matches_modulus_flag_of_exponential(rng):
    a, _ = realpart_separated_matrix(rng, 4)
    flag = realpart_flag(a)
    exp_flag = modulus_flag(expm(a))
    assert flag.k == exp_flag.k == 4
    assert_allclose(np.exp(flag.realparts), exp_flag.moduli, rtol=1e-8)
    for j in range(1, flag.k):
        angle = max_angle(range_basis(flag.projections[j - 1]), range_basis(exp_flag.projections[j - 1]))
        assert angle <= 1e-6
