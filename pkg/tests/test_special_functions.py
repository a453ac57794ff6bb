# tests/test_special_functions.py
import cmath
import math

from hypothesis import given
import hypothesis.strategies as st
import mpmath
import pytest

from app.exceptions import DomainViolation, IntegerArgument, PoleAtNonPositiveInteger
from app.special_functions import (
    LogComplex,
    LogSignedReal,
    l_func,
    log_gamma,
    log_gamma_real,
    on_zero_lattice,
    product,
    upsilon,
    upsilon_log,
    upsilon_prime_zero,
    upsilon_prime_zero_fd,
    upsilon_shift_factor,
)

SQRT2 = math.sqrt(2.0)
GAMMAS = (0.8, 1.0, 1.3)


def upsilon_by_mpmath(x, gamma):
    """Upsilon from its integral representation, evaluated at 30 digits."""
    with mpmath.workdps(30):
        b = mpmath.mpf(gamma) / mpmath.sqrt(2)
        half = (b + 1 / b) / 2 - mpmath.mpf(x) / mpmath.sqrt(2)

        def integrand(t):
            return (half ** 2 * mpmath.exp(-t)
                    - mpmath.sinh(half * t / 2) ** 2 / (mpmath.sinh(b * t / 2) * mpmath.sinh(t / (2 * b)))) / t

        return float(mpmath.exp(mpmath.quad(integrand, [0, 1, 10, mpmath.inf])))


# --- l and log Gamma ----------------------------------------------------------------------

def test_l_at_one_half():
    assert l_func(0.5).value == pytest.approx(1.0, abs=1e-15)


@given(st.floats(min_value=-6.0, max_value=6.0))
def test_l_reflection(x):
    if abs(x - round(x)) < 1e-6:
        return
    assert (l_func(x) * l_func(1.0 - x)).value == pytest.approx(1.0, rel=1e-12)


def test_l_integer_arguments():
    with pytest.raises(IntegerArgument) as pole:
        l_func(0.0)
    assert pole.value.kind == "pole"
    with pytest.raises(IntegerArgument) as zero:
        l_func(2.0, factor="l(B1)")
    assert zero.value.kind == "zero"
    assert zero.value.factor == "l(B1)"


@pytest.mark.parametrize("z", [0.3, 2.5 + 1.0j, -3.7 + 0.2j, 40.0 - 12.0j, 0.01 + 0.01j])
def test_log_gamma_matches_mpmath(z):
    ours = log_gamma(z)
    reference = complex(mpmath.loggamma(z))
    assert ours.log_abs == pytest.approx(reference.real, rel=1e-13, abs=1e-13)
    assert cmath.exp(1j * ours.phase) == pytest.approx(cmath.exp(1j * reference.imag), abs=1e-12)


def test_log_gamma_real_sign():
    g = log_gamma_real(-0.5)
    assert g.sign == -1
    assert g.value == pytest.approx(-2.0 * math.sqrt(math.pi), rel=1e-14)
    with pytest.raises(PoleAtNonPositiveInteger):
        log_gamma_real(-2.0)


# --- log-domain arithmetic ----------------------------------------------------------------

def test_zero_times_pole_is_indeterminate():
    assert (LogSignedReal.zero() * LogSignedReal.pole()).is_indeterminate
    assert product([LogSignedReal.from_float(3.0), LogSignedReal.zero(), LogSignedReal.pole()]).flags == [
        "indeterminate"]


def test_powers_and_quotients():
    x = LogSignedReal.from_float(-2.0)
    assert (x ** 3).value == pytest.approx(-8.0)
    assert (x ** 2).sign == 1
    assert (LogSignedReal.from_float(6.0) / x).value == pytest.approx(-3.0)
    assert (LogSignedReal.zero() ** -1).is_pole
    with pytest.raises(DomainViolation):
        x ** 0.5


def test_huge_magnitudes_stay_in_log_domain():
    big = LogSignedReal(2000.0, 1)
    assert (big * big).log_abs == 4000.0
    assert big.value == math.inf
    assert (big / big).value == pytest.approx(1.0)


def test_log_complex_phase_is_wrapped():
    z = LogComplex(0.0, 3.0 * math.pi)
    assert z.phase == pytest.approx(math.pi)
    assert LogComplex.from_complex(-2.0).to_signed_real().value == pytest.approx(-2.0)
    with pytest.raises(ValueError):
        LogComplex.from_complex(1j).to_signed_real()


# --- Upsilon ------------------------------------------------------------------------------

@pytest.mark.parametrize("gamma", GAMMAS)
def test_upsilon_at_half_q_is_one(gamma):
    q = gamma + 2.0 / gamma
    assert abs(upsilon(q / 2.0, gamma).log_abs) < 1e-13


@pytest.mark.parametrize("gamma", GAMMAS)
@pytest.mark.parametrize("fraction", [0.15, 0.35, 0.8])
def test_upsilon_matches_integral_representation(gamma, fraction):
    x = fraction * (gamma + 2.0 / gamma)
    assert upsilon(x, gamma).value == pytest.approx(upsilon_by_mpmath(x, gamma), rel=1e-9)


@pytest.mark.parametrize("gamma", GAMMAS)
def test_upsilon_zero_lattice(gamma):
    q = gamma + 2.0 / gamma
    for z in (0.0, -gamma, -2.0 / gamma, q, q + gamma, q + 2.0 * gamma + 2.0 / gamma):
        assert on_zero_lattice(z, gamma)
        assert upsilon(z, gamma).is_zero
    assert not on_zero_lattice(0.5 * q, gamma)


@given(st.sampled_from(GAMMAS), st.floats(min_value=0.02, max_value=0.98))
def test_upsilon_reflection(gamma, fraction):
    q = gamma + 2.0 / gamma
    x = fraction * q
    left, right = upsilon(x, gamma), upsilon(q - x, gamma)
    assert left.sign == right.sign
    assert left.log_abs == pytest.approx(right.log_abs, abs=1e-12 * max(1.0, abs(left.log_abs)))


@given(st.sampled_from(GAMMAS), st.floats(min_value=-4.0, max_value=6.0), st.booleans())
def test_upsilon_shift_equation(gamma, x, large_step):
    chi = 2.0 / gamma if large_step else gamma
    if on_zero_lattice(x, gamma) or on_zero_lattice(x + chi, gamma) or abs(chi * x / 2.0 - round(chi * x / 2.0)) < 1e-6:
        return
    lhs = upsilon(x + chi, gamma)
    rhs = upsilon_shift_factor(x, chi, gamma).to_signed_real() * upsilon(x, gamma)
    assert lhs.sign == rhs.sign
    assert lhs.log_abs == pytest.approx(rhs.log_abs, abs=1e-10 * max(1.0, abs(lhs.log_abs)))


@pytest.mark.parametrize("gamma", GAMMAS)
def test_upsilon_derivative_at_zero(gamma):
    assert upsilon_prime_zero(gamma) > 0.0
    assert upsilon_prime_zero_fd(gamma) == pytest.approx(upsilon_prime_zero(gamma), rel=1e-6)


def test_upsilon_negative_between_first_zeros():
    gamma = 1.0
    assert upsilon(-0.5, gamma).sign == -1
    assert upsilon(0.5, gamma).sign == 1


def test_complex_upsilon_is_conjugation_symmetric():
    gamma = 1.1
    z = 0.7 + 0.4j
    up, down = upsilon_log(z, gamma), upsilon_log(z.conjugate(), gamma)
    assert up.log_abs == pytest.approx(down.log_abs, abs=1e-12)
    assert up.phase == pytest.approx(-down.phase, abs=1e-12)


def test_complex_upsilon_agrees_with_real_axis_limit():
    gamma = 0.9
    x = 1.3
    near = upsilon_log(complex(x, 1e-7), gamma)
    assert near.log_abs == pytest.approx(upsilon(x, gamma).log_abs, abs=1e-6)


def test_complex_upsilon_shift_equation():
    gamma = 1.2
    z = -1.4 + 0.3j
    lhs = upsilon_log(z + gamma, gamma).value
    rhs = (upsilon_shift_factor(z, gamma, gamma) * upsilon_log(z, gamma)).value
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_upsilon_rejects_bad_coupling():
    with pytest.raises(DomainViolation):
        upsilon(0.3, SQRT2)
