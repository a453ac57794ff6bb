# tests/test_hypergeometric_blocks.py
import cmath
import math

import mpmath
import numpy as np
import pytest

from app.exceptions import BParameterNonPositiveInteger, DomainViolation, NonGenericParameters, SeriesDivergence
from app.hypergeometric_blocks import (
    BlockParams,
    block_G,
    block_H,
    cauchy_derivatives,
    closed_form_coefficients,
    crossing_coefficient,
    crossing_coefficients_from_connection,
    crossing_combination,
    crossing_sine_identity,
    hyper_3f2,
    hyper_3f2_coefficients,
    hyper_3f2_continued,
    ode_residual,
    thomae_connection_residual,
)


@pytest.fixture
def p():
    return BlockParams((0.1, 0.3, 0.45), (0.35, 0.7))


def reference(p, z):
    return complex(mpmath.hyp3f2(*p.A, *p.B, z))


@pytest.mark.parametrize("z", [0.0, 0.4, -0.7, 0.5 + 0.6j, 0.9j])
def test_series_matches_mpmath(p, z):
    result = hyper_3f2(p, z)
    assert result.value == pytest.approx(reference(p, z), rel=1e-12, abs=1e-15)
    assert result.truncation_bound < 1e-12


@pytest.mark.parametrize("z", [1.5 + 0.5j, -2.0, -0.5 + 1.5j, 0.95, 3.0 - 2.0j])
def test_continuation_matches_mpmath(p, z):
    assert hyper_3f2_continued(p, z) == pytest.approx(reference(p, z), rel=1e-9)


def test_series_refuses_outside_disc(p):
    with pytest.raises(SeriesDivergence):
        hyper_3f2(p, 0.95)


def test_continuation_refuses_cut(p):
    with pytest.raises(DomainViolation):
        hyper_3f2_continued(p, 2.0)


def test_nonpositive_integer_lower_parameter():
    with pytest.raises(BParameterNonPositiveInteger):
        hyper_3f2(BlockParams((0.1, 0.2, 0.3), (-1.0, 0.5)), 0.2)


def test_coefficients_are_pochhammer_ratios(p):
    coeffs = hyper_3f2_coefficients(p, 12)
    for n, c in enumerate(coeffs):
        expected = (mpmath.rf(p.A[0], n) * mpmath.rf(p.A[1], n) * mpmath.rf(p.A[2], n)
                    / (mpmath.rf(p.B[0], n) * mpmath.rf(p.B[1], n) * mpmath.factorial(n)))
        assert c == pytest.approx(float(expected), rel=1e-12)


@pytest.mark.parametrize("i", [0, 1, 2])
@pytest.mark.parametrize("z", [0.3 + 0.2j, 0.6, -2.0 + 0.5j, 2.5 + 1.0j])
def test_origin_blocks_solve_the_equation(p, i, z):
    assert ode_residual(p, lambda w: block_H(i, p, w), z) < 1e-6


@pytest.mark.parametrize("i", [1, 2, 3])
@pytest.mark.parametrize("z", [-2.0 + 0.5j, -0.4, 0.3 - 0.7j, -5.0 - 1.0j])
def test_infinity_blocks_solve_the_equation(p, i, z):
    assert ode_residual(p, lambda w: block_G(i, p, w), z) < 1e-6


def test_origin_block_exponents(p):
    z = 1e-3
    h1 = block_H(1, p, z)
    assert h1 == pytest.approx(z ** (1.0 - p.B[0]), rel=1e-2)
    assert block_H(0, p, 0.0) == 1.0


@pytest.mark.parametrize("z", [-2.0 + 0.5j, -0.3 + 0.01j, -6.0, 0.4 - 1.2j])
def test_thomae_connection(p, z):
    assert thomae_connection_residual(p, z) < 1e-8


def test_closed_form_coefficients_match_connection(p):
    closed = np.array([crossing_coefficient(p, 1), crossing_coefficient(p, 2)])
    np.testing.assert_allclose(crossing_coefficients_from_connection(p), closed, rtol=1e-8)


@pytest.mark.parametrize("i", [1, 2, 3])
def test_sine_identity(p, i):
    assert crossing_sine_identity(p, i) < 1e-10


@pytest.mark.parametrize("i", [1, 2, 3])
def test_sine_identity_detects_a_one_percent_change(p, i):
    a = p.A[i - 1]
    b1, b2 = p.B
    t0 = abs(math.sin(math.pi * a) * math.sin(math.pi * (b1 - b2)))
    t1 = abs(math.sin(math.pi * (b1 - a)) * math.sin(math.pi * b2))
    t2 = abs(math.sin(math.pi * (b2 - a)) * math.sin(math.pi * b1))
    lambdas = (1.01 * crossing_coefficient(p, 1), crossing_coefficient(p, 2))
    expected = 0.01 * t1 / max(t0, 1.01 * t1, t2)
    assert crossing_sine_identity(p, i, lambdas) == pytest.approx(expected, rel=1e-6)
    assert expected > 1e-3


def _scaled_wronskian(blocks, z):
    """det of [f, z f', z^2 f''] over the blocks, relative to the product of the row norms."""
    rows = np.array([[d * abs(z) ** m for m, d in enumerate(cauchy_derivatives(f, z, order=2))] for f in blocks])
    return abs(np.linalg.det(rows)) / np.prod(np.linalg.norm(rows, axis=1))


def test_origin_blocks_are_independent(p):
    assert _scaled_wronskian([lambda w, i=i: block_H(i, p, w) for i in range(3)], 0.3) > 1e-4


def test_infinity_blocks_are_independent(p):
    assert _scaled_wronskian([lambda w, i=i: block_G(i, p, w) for i in (1, 2, 3)], -3.0) > 1e-5


@pytest.mark.parametrize("x", [0.4, 2.5])
def test_origin_block_monodromy(p, x):
    above, below = complex(-x, 1e-13), complex(-x, -1e-13)
    assert block_H(0, p, above) == pytest.approx(block_H(0, p, below), rel=1e-8)
    for i in (1, 2):
        factor = cmath.exp(2j * math.pi * (1.0 - p.B[i - 1]))
        assert block_H(i, p, above) == pytest.approx(factor * block_H(i, p, below), rel=1e-8)


def test_ode_residual_detects_a_perturbation(p):
    assert ode_residual(p, lambda w: block_H(0, p, w) + 0.01 * w * w, 0.3) > 1e-3


def test_crossing_combination_near_origin(p):
    # |H0|^2 -> 1 and the H2 term dominates the correction, |z|^(2(1-B2)) against |z|^(2(1-B1)) and |z|
    coeffs = closed_form_coefficients(p, C=2.5)
    z = 1e-12
    value = crossing_combination(p, coeffs, z)
    assert value == pytest.approx(2.5, rel=1e-6)
    assert (value / 2.5 - 1.0) / z ** (2.0 * (1.0 - p.B[1])) == pytest.approx(coeffs.A2, rel=1e-3)


def test_non_generic_parameters():
    p = BlockParams((0.2, 1.2, 0.45), (0.35, 0.7))
    assert p.non_generic_pairs() == ["A1-A2"]
    with pytest.raises(NonGenericParameters):
        crossing_coefficients_from_connection(p)


def test_crossing_combination_is_real_and_conjugation_symmetric(p):
    coeffs = closed_form_coefficients(p)
    z = 0.5 * np.exp(1j * 1.1)
    assert crossing_combination(p, coeffs, z) == pytest.approx(crossing_combination(p, coeffs, np.conj(z)), rel=1e-12)


def test_cauchy_derivatives_of_exponential():
    derivatives = cauchy_derivatives(np.exp, 0.3, order=3, radius=0.1)
    for d in derivatives:
        assert d == pytest.approx(np.exp(0.3), rel=1e-10)


def test_block_params_shape():
    with pytest.raises(DomainViolation):
        BlockParams((0.1, 0.2), (0.3, 0.4))
