# app/special_functions.py
"""
Gamma-based factors and the Upsilon function, carried in log scale.

Upsilon follows the convention Upsilon(z) = Upsilon_b(z/sqrt2) with b = gamma/sqrt2,
so that its zeros sit on -gamma*N - (2/gamma)*N and q + gamma*N + (2/gamma)*N with
q = gamma + 2/gamma, and Upsilon(q - z) = Upsilon(z).
"""
from dataclasses import dataclass
from functools import lru_cache
import cmath
import logging
import math
import warnings

import numpy as np
from scipy import integrate
from scipy.special import gammaln, gammasgn, loggamma

from .constants import (
    INTEGER_TOLERANCE,
    SQRT2,
    UPSILON_CACHE_SIZE,
    UPSILON_EPSABS,
    UPSILON_EPSREL,
    UPSILON_QUAD_LIMIT,
    UPSILON_SERIES_CUTOFF,
    UPSILON_TAIL,
)
from .exceptions import DomainViolation, IntegerArgument, PoleAtNonPositiveInteger


def _wrap_phase(phase):
    wrapped = math.remainder(phase, 2.0 * math.pi)
    return math.pi if wrapped <= -math.pi else wrapped


@dataclass(frozen=True)
class LogSignedReal:
    """
    A real number sign * exp(log_abs).

    log_abs = -inf with sign 0 is an exact zero, log_abs = +inf a pole, and
    log_abs = nan (sign 0) the indeterminate 0/0 or 0*inf.
    """
    log_abs: float
    sign: int

    @classmethod
    def from_float(cls, x):
        if x == 0.0:
            return cls.zero()
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    @classmethod
    def one(cls):
        return cls(0.0, 1)

    @classmethod
    def zero(cls):
        return cls(-math.inf, 0)

    @classmethod
    def pole(cls, sign=1):
        return cls(math.inf, sign)

    @classmethod
    def indeterminate(cls):
        return cls(math.nan, 0)

    @property
    def is_zero(self):
        return self.sign == 0 and self.log_abs == -math.inf

    @property
    def is_pole(self):
        return self.log_abs == math.inf

    @property
    def is_indeterminate(self):
        return math.isnan(self.log_abs)

    @property
    def is_finite(self):
        return math.isfinite(self.log_abs)

    @property
    def value(self):
        """Linear value; overflows to +-inf for huge magnitudes."""
        if self.is_indeterminate:
            return math.nan
        if self.is_zero:
            return 0.0
        try:
            return self.sign * math.exp(self.log_abs)
        except OverflowError:
            return self.sign * math.inf

    @property
    def flags(self):
        if self.is_indeterminate:
            return ["indeterminate"]
        if self.is_pole:
            return ["pole"]
        if self.is_zero:
            return ["zero"]
        return []

    def __mul__(self, other):
        if self.is_indeterminate or other.is_indeterminate:
            return LogSignedReal.indeterminate()
        if (self.is_zero and other.is_pole) or (self.is_pole and other.is_zero):
            return LogSignedReal.indeterminate()
        if self.is_zero or other.is_zero:
            return LogSignedReal.zero()
        return LogSignedReal(self.log_abs + other.log_abs, self.sign * other.sign)

    def inverse(self):
        if self.is_indeterminate:
            return self
        if self.is_zero:
            return LogSignedReal.pole()
        if self.is_pole:
            return LogSignedReal.zero()
        return LogSignedReal(-self.log_abs, self.sign)

    def __truediv__(self, other):
        return self * other.inverse()

    def __pow__(self, exponent):
        if self.sign < 0 and float(exponent) != int(exponent):
            raise DomainViolation(f"Non-integer power {exponent} of a negative number")
        if exponent == 0:
            return LogSignedReal.one()
        if self.is_zero:
            return self if exponent > 0 else LogSignedReal.pole()
        integral = float(exponent) == int(exponent)
        sign = self.sign if integral and int(exponent) % 2 else 1
        return LogSignedReal(self.log_abs * exponent, sign)

    def to_log_complex(self):
        if self.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_abs, 0.0 if self.sign > 0 else math.pi)

    def to_record(self):
        return {"log_abs": self.log_abs, "sign": self.sign, "flags": self.flags}


def product(factors):
    """Multiply LogSignedReal factors, summing logs with math.fsum."""
    factors = list(factors)
    if not factors:
        return LogSignedReal.one()
    if any(f.is_indeterminate for f in factors):
        return LogSignedReal.indeterminate()
    zeros = any(f.is_zero for f in factors)
    poles = any(f.is_pole for f in factors)
    if zeros and poles:
        return LogSignedReal.indeterminate()
    if zeros:
        return LogSignedReal.zero()
    sign = 1
    for f in factors:
        sign *= f.sign
    return LogSignedReal(math.fsum(f.log_abs for f in factors), sign)


@dataclass(frozen=True)
class LogComplex:
    """A complex number exp(log_abs + i*phase) with phase in (-pi, pi]."""
    log_abs: float
    phase: float

    def __post_init__(self):
        if math.isfinite(self.phase):
            object.__setattr__(self, "phase", _wrap_phase(self.phase))

    @classmethod
    def from_log(cls, w):
        w = complex(w)
        return cls(w.real, w.imag)

    @classmethod
    def from_complex(cls, z):
        if z == 0:
            return cls.zero()
        return cls(math.log(abs(z)), cmath.phase(z))

    @classmethod
    def zero(cls):
        return cls(-math.inf, 0.0)

    @property
    def is_zero(self):
        return self.log_abs == -math.inf

    @property
    def value(self):
        if self.is_zero:
            return 0j
        return cmath.exp(complex(self.log_abs, self.phase))

    def __mul__(self, other):
        if self.is_zero or other.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_abs + other.log_abs, self.phase + other.phase)

    def __truediv__(self, other):
        if other.is_zero:
            raise ZeroDivisionError("division by an exact zero")
        if self.is_zero:
            return self
        return LogComplex(self.log_abs - other.log_abs, self.phase - other.phase)

    def to_signed_real(self, tol=1e-8):
        """Convert a value known to be real; raises ValueError otherwise."""
        if self.is_zero:
            return LogSignedReal.zero()
        if abs(self.phase) <= tol:
            return LogSignedReal(self.log_abs, 1)
        if math.pi - abs(self.phase) <= tol:
            return LogSignedReal(self.log_abs, -1)
        raise ValueError(f"LogComplex with phase {self.phase} is not real")


def _nearest_integer(x):
    n = round(x)
    return n, abs(x - n) <= INTEGER_TOLERANCE * max(1.0, abs(x))


def log_gamma(z):
    """
    Principal branch of log Gamma(z).

    Args:
        z (complex): Argument, not a non-positive integer.

    Returns:
        LogComplex: log|Gamma(z)| and arg Gamma(z).

    Raises:
        PoleAtNonPositiveInteger: z is 0, -1, -2, ...
    """
    z = complex(z)
    if z.imag == 0.0:
        n, exact = _nearest_integer(z.real)
        if exact and n <= 0:
            raise PoleAtNonPositiveInteger(f"Gamma has a pole at {z.real}")
    return LogComplex.from_log(loggamma(z))


def log_gamma_real(x):
    """log|Gamma(x)| and the sign of Gamma(x) for real x."""
    n, exact = _nearest_integer(x)
    if exact and n <= 0:
        raise PoleAtNonPositiveInteger(f"Gamma has a pole at {x}")
    return LogSignedReal(float(gammaln(x)), int(gammasgn(x)))


def l_func(x, factor=None):
    """
    l(x) = Gamma(x) / Gamma(1 - x) for real x.

    Args:
        x (float): Argument.
        factor (str): Optional label reported in errors.

    Returns:
        LogSignedReal: The value of l(x).

    Raises:
        IntegerArgument: x is an integer; kind "pole" for x <= 0, "zero" for x >= 1.
    """
    n, exact = _nearest_integer(x)
    if exact:
        raise IntegerArgument(x, "pole" if n <= 0 else "zero", factor)
    return log_gamma_real(x) / log_gamma_real(1.0 - x)


def _log_l_complex(z):
    return complex(loggamma(z)) - complex(loggamma(1.0 - z))


def strip_bounds(gamma):
    """Window of real parts into which Upsilon arguments are reduced."""
    q = gamma + 2.0 / gamma
    return q / 2.0 - gamma / 2.0, q / 2.0 + gamma / 2.0


def on_zero_lattice(z, gamma, tol=1e-12):
    """True when z is one of the zeros -m*gamma - 2n/gamma or q + m*gamma + 2n/gamma."""
    z = complex(z)
    scale = 1.0 + abs(z)
    if abs(z.imag) > tol * scale:
        return False
    q = gamma + 2.0 / gamma
    for distance in (-z.real, z.real - q):
        if distance < -tol * scale:
            continue
        for m in range(int(max(distance, 0.0) / gamma + 1e-9) + 1):
            r = (distance - m * gamma) * gamma / 2.0
            n = round(r)
            if n >= 0 and abs(r - n) * 2.0 / gamma <= tol * scale:
                return True
    return False


def _strip_steps(x, gamma):
    """
    Shift steps bringing Re z into the strip window.

    Returns:
        tuple: (steps, offset) where each step is (offset_of_point, chi, sign) and
        log Upsilon(z) = log Upsilon(z + offset) + sum sign * log S_chi(z + offset_of_point).
    """
    lo, hi = strip_bounds(gamma)
    big = 2.0 / gamma
    steps = []
    offset = 0.0
    while x + offset > hi:
        chi = big if x + offset - big >= lo else gamma
        offset -= chi
        steps.append((offset, chi, 1))
    while x + offset < lo:
        chi = big if x + offset + big <= hi else gamma
        steps.append((offset, chi, -1))
        offset += chi
    return steps, offset


def _integrand_constants(gamma):
    beta = gamma / (2.0 * SQRT2)
    delta = 1.0 / (SQRT2 * gamma)
    return beta, delta


def _series_piece(a, beta, delta, t0):
    # integral over [0, t0] of the Maclaurin expansion of the integrand
    k = a * a / 24.0 - (beta * beta + delta * delta) / 6.0
    return 0.5 * a * a * (-t0 + t0 ** 2 / 4.0 - t0 ** 3 / 18.0 - k * t0 ** 2 / 2.0)


def _tail_end(c_abs_real, beta, delta):
    rate = beta + delta - 2.0 * c_abs_real
    return max(40.0, -math.log(UPSILON_TAIL) / rate)


def _quad(f, t0, t1):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, error = integrate.quad(f, t0, t1, epsabs=UPSILON_EPSABS, epsrel=UPSILON_EPSREL, limit=UPSILON_QUAD_LIMIT)
    if error > 1e-9 * max(1.0, abs(value)):
        logging.warning(f"Upsilon quadrature error estimate {error:.2e} on [{t0}, {t1:.1f}]")
    return value


@lru_cache(maxsize=UPSILON_CACHE_SIZE)
def _strip_integral_real(x, gamma):
    q = gamma + 2.0 / gamma
    a = q / 2.0 - x
    if a == 0.0:
        return 0.0
    beta, delta = _integrand_constants(gamma)
    c = abs(a) / (2.0 * SQRT2)
    half_a2 = 0.5 * a * a
    t0 = UPSILON_SERIES_CUTOFF

    def integrand(t):
        ratio = math.exp((2.0 * c - beta - delta) * t) * math.expm1(-2.0 * c * t) ** 2 / (
            math.expm1(-2.0 * beta * t) * math.expm1(-2.0 * delta * t))
        return (half_a2 * math.exp(-t) - ratio) / t

    return _series_piece(a, beta, delta, t0) + _quad(integrand, t0, _tail_end(c, beta, delta))


@lru_cache(maxsize=UPSILON_CACHE_SIZE)
def _strip_integral_complex(z, gamma):
    q = gamma + 2.0 / gamma
    a = q / 2.0 - z
    beta, delta = _integrand_constants(gamma)
    c = a / (2.0 * SQRT2)
    if c.real < 0.0:
        c = -c
    half_a2 = 0.5 * a * a
    t0 = UPSILON_SERIES_CUTOFF

    def integrand(t):
        ratio = np.exp((2.0 * c - beta - delta) * t) * np.expm1(-2.0 * c * t) ** 2 / (
            math.expm1(-2.0 * beta * t) * math.expm1(-2.0 * delta * t))
        return (half_a2 * math.exp(-t) - ratio) / t

    t1 = _tail_end(c.real, beta, delta)
    real = _quad(lambda t: integrand(t).real, t0, t1)
    imag = _quad(lambda t: integrand(t).imag, t0, t1)
    return _series_piece(a, beta, delta, t0) + complex(real, imag)


def _check_gamma(gamma):
    if not 0.0 < gamma < SQRT2:
        raise DomainViolation(f"gamma must lie in (0, sqrt2), got {gamma}")


def upsilon_shift_factor(z, chi, gamma):
    """
    Factor S_chi(z) = l(chi*z/2) (chi/sqrt2)^(1 - chi*z) of Upsilon(z + chi) = S_chi(z) Upsilon(z).

    Args:
        z (complex): Base point.
        chi (float): gamma or 2/gamma.
        gamma (float): Coupling.

    Returns:
        LogComplex: The factor.
    """
    z = complex(z)
    if z.imag == 0.0:
        return _shift_factor_real(z.real, chi).to_log_complex()
    return LogComplex.from_log(_log_l_complex(chi * z / 2.0) + (1.0 - chi * z) * math.log(chi / SQRT2))


def _shift_factor_real(x, chi):
    power = LogSignedReal((1.0 - chi * x) * math.log(chi / SQRT2), 1)
    return l_func(chi * x / 2.0, factor="Upsilon shift") * power


def upsilon(x, gamma):
    """
    Upsilon at a real argument.

    Args:
        x (float): Argument.
        gamma (float): Coupling in (0, sqrt2).

    Returns:
        LogSignedReal: The value, exact zero on the zero lattice.
    """
    _check_gamma(gamma)
    x = float(x)
    if on_zero_lattice(x, gamma):
        return LogSignedReal.zero()
    steps, offset = _strip_steps(x, gamma)
    factors = [LogSignedReal(_strip_integral_real(x + offset, gamma), 1)]
    for point, chi, sign in steps:
        factor = _shift_factor_real(x + point, chi)
        factors.append(factor if sign > 0 else factor.inverse())
    return product(factors)


def upsilon_log(z, gamma):
    """
    log Upsilon(z) for complex z.

    Inside the window q/2 - gamma/2 <= Re z <= q/2 + gamma/2 the integral
    representation is evaluated by adaptive quadrature; elsewhere z is moved into
    the window with the shift equations, larger step 2/gamma first.

    Args:
        z (complex): Argument.
        gamma (float): Coupling in (0, sqrt2).

    Returns:
        LogComplex: log|Upsilon(z)| and arg Upsilon(z); log_abs = -inf on the zero lattice.
    """
    z = complex(z)
    if z.imag == 0.0:
        return upsilon(z.real, gamma).to_log_complex()
    _check_gamma(gamma)
    steps, offset = _strip_steps(z.real, gamma)
    total = LogComplex.from_log(_strip_integral_complex(z + offset, gamma))
    for point, chi, sign in steps:
        factor = upsilon_shift_factor(z + point, chi, gamma)
        total = total * factor if sign > 0 else total / factor
    return total


def upsilon_prime_zero(gamma):
    """
    Upsilon'(0), from the shift equation at the simple zero: Upsilon'(0) = Upsilon(gamma)/sqrt2.

    Args:
        gamma (float): Coupling in (0, sqrt2).

    Returns:
        float: Upsilon'(0) > 0.
    """
    return math.exp(upsilon(gamma, gamma).log_abs) / SQRT2


def upsilon_prime_zero_fd(gamma, h=1e-4):
    """Central finite-difference estimate of Upsilon'(0)."""
    return (upsilon(h, gamma).value - upsilon(-h, gamma).value) / (2.0 * h)
