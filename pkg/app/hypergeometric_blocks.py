# app/hypergeometric_blocks.py
"""
Third-order hypergeometric blocks.

The blocks solve the order-three equation
    [theta (theta + B1 - 1)(theta + B2 - 1) - z (theta + A1)(theta + A2)(theta + A3)] H = 0,
theta = z d/dz. H0, H1, H2 are the solutions with exponents 0, 1-B1, 1-B2 at the
origin and G1, G2, G3 those with exponents A1, A2, A3 at infinity. Fractional powers
use the principal branch; values on a cut are limits from the upper half-plane.
"""
from dataclasses import dataclass
import cmath
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import gamma as gamma_fn
from scipy.special import rgamma

from .constants import (
    CAUCHY_NODES,
    CAUCHY_RADIUS,
    CONTINUATION_ANCHOR,
    CONTINUATION_ATOL,
    CONTINUATION_RTOL,
    GENERICITY_TOLERANCE,
    SERIES_MAX_TERMS,
    SERIES_RADIUS,
    SERIES_RTOL,
)
from .exceptions import (
    BParameterNonPositiveInteger,
    DomainViolation,
    NonGenericParameters,
    SeriesDivergence,
)
from .special_functions import l_func, product


@dataclass(frozen=True)
class BlockParams:
    """
    Parameters (A1, A2, A3; B1, B2) of the hypergeometric equation.

    Attributes:
        A (tuple): Upper parameters.
        B (tuple): Lower parameters.
    """
    A: tuple
    B: tuple

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(float(a) for a in self.A))
        object.__setattr__(self, "B", tuple(float(b) for b in self.B))
        if len(self.A) != 3 or len(self.B) != 2:
            raise DomainViolation(f"Expected 3 upper and 2 lower parameters, got {self.A}, {self.B}")

    @property
    def elementary(self):
        a1, a2, a3 = self.A
        return a1 + a2 + a3, a1 * a2 + a1 * a3 + a2 * a3, a1 * a2 * a3

    def differences(self):
        """Exponent differences at 0 and at infinity, keyed by label."""
        a1, a2, a3 = self.A
        b1, b2 = self.B
        return {
            "B1": b1,
            "B2": b2,
            "B1-B2": b1 - b2,
            "A1-A2": a1 - a2,
            "A2-A3": a2 - a3,
            "A1-A3": a1 - a3,
        }

    def non_generic_pairs(self):
        return [label for label, d in self.differences().items() if abs(d - round(d)) < GENERICITY_TOLERANCE]

    @property
    def is_generic(self):
        return not self.non_generic_pairs()

    def require_generic(self):
        pairs = self.non_generic_pairs()
        if pairs:
            raise NonGenericParameters(pairs)

    def primed(self, i):
        """Parameters of the series multiplying z^(1-B_i) in H_i."""
        b1, b2 = self.B
        if i == 1:
            return BlockParams(tuple(1.0 - b1 + a for a in self.A), (2.0 - b1, 1.0 - b1 + b2))
        if i == 2:
            return BlockParams(tuple(1.0 - b2 + a for a in self.A), (1.0 - b2 + b1, 2.0 - b2))
        return self

    def at_infinity(self, i):
        """Upper and lower parameters of the series in 1/z inside G_i, i in {1,2,3}."""
        k = i - 1
        a = self.A[k]
        a_prev = self.A[(k - 1) % 3]
        a_next = self.A[(k + 1) % 3]
        b1, b2 = self.B
        return (a, 1.0 + a - b1, 1.0 + a - b2), (1.0 + a - a_prev, 1.0 + a - a_next)


@dataclass(frozen=True)
class BlockValue:
    """
    A summed series.

    Attributes:
        value (complex): Partial sum.
        n_terms (int): Terms kept.
        truncation_bound (float): Bound on the discarded tail.
    """
    value: complex
    n_terms: int
    truncation_bound: float


@dataclass(frozen=True)
class CrossingCoefficients:
    C: float
    A1: float
    A2: float


def _check_lower(lower):
    for b in lower:
        if b <= 0.0 and abs(b - round(b)) < GENERICITY_TOLERANCE:
            raise BParameterNonPositiveInteger(f"Lower parameter {b} is a non-positive integer")


def _sum_series(upper, lower, z, derivatives=False):
    """
    Sum the 3F2 series with the term recurrence, optionally with its first two derivatives.

    Returns:
        BlockValue, or (BlockValue, F', F'') when derivatives is set.
    """
    _check_lower(lower)
    a1, a2, a3 = upper
    b1, b2 = lower
    z = complex(z)
    term = 1.0 + 0j
    total = term
    d1 = d2 = 0j
    bound = 0.0
    n = 0
    while True:
        ratio = (n + a1) * (n + a2) * (n + a3) / ((n + 1) * (n + b1) * (n + b2))
        term = term * ratio * z
        n += 1
        total += term
        if derivatives and z != 0:
            d1 += n * term / z
            d2 += n * (n - 1) * term / (z * z)
        if term == 0:
            break
        next_ratio = abs((n + a1) * (n + a2) * (n + a3) / ((n + 1) * (n + b1) * (n + b2)) * z)
        rho = max(next_ratio, abs(z))
        if rho < 1.0 and abs(term) <= SERIES_RTOL * abs(total):
            bound = abs(term) * rho / (1.0 - rho)
            break
        if n >= SERIES_MAX_TERMS:
            raise SeriesDivergence(f"3F2 series did not converge at z={z} after {n} terms")
    value = BlockValue(total, n + 1, bound)
    if not derivatives:
        return value
    if z == 0:
        c1 = a1 * a2 * a3 / (b1 * b2)
        c2 = c1 * (1 + a1) * (1 + a2) * (1 + a3) / (2 * (1 + b1) * (1 + b2))
        d1, d2 = c1, 2.0 * c2
    return value, d1, d2


def hyper_3f2(p, z):
    """
    3F2(A; B; z) by direct summation.

    Args:
        p (BlockParams): Parameters.
        z (complex): Point with |z| <= 0.9.

    Returns:
        BlockValue: Sum, number of terms and tail bound.

    Raises:
        SeriesDivergence: |z| beyond the summation disc.
        BParameterNonPositiveInteger: B1 or B2 in {0, -1, ...}.
    """
    if abs(z) > SERIES_RADIUS + 1e-12:
        raise SeriesDivergence(f"|z|={abs(z):.4f} exceeds the series radius {SERIES_RADIUS}")
    return _sum_series(p.A, p.B, z)


def hyper_3f2_coefficients(p, n):
    """First n Taylor coefficients of 3F2(A; B; z)."""
    _check_lower(p.B)
    coeffs = np.empty(n)
    coeffs[0] = 1.0
    a1, a2, a3 = p.A
    b1, b2 = p.B
    for k in range(n - 1):
        coeffs[k + 1] = coeffs[k] * (k + a1) * (k + a2) * (k + a3) / ((k + 1) * (k + b1) * (k + b2))
    return coeffs


def _ode_rhs_coefficients(upper, lower):
    e1 = sum(upper)
    e2 = upper[0] * upper[1] + upper[0] * upper[2] + upper[1] * upper[2]
    e3 = upper[0] * upper[1] * upper[2]
    f1 = lower[0] + lower[1] - 2.0
    return e1, e2, e3, f1, lower[0] * lower[1]


def _continued(upper, lower, z):
    """3F2 on C minus [1, inf): series inside the disc, ODE integration along a ray outside."""
    z = complex(z)
    if abs(z) <= SERIES_RADIUS:
        return _sum_series(upper, lower, z).value
    if z.imag == 0.0 and z.real >= 1.0:
        raise DomainViolation(f"z={z} lies on the branch cut [1, inf) of 3F2")
    z0 = CONTINUATION_ANCHOR * z / abs(z)
    start, d1, d2 = _sum_series(upper, lower, z0, derivatives=True)
    e1, e2, e3, f1, b1b2 = _ode_rhs_coefficients(upper, lower)
    step = z - z0

    def rhs(t, y):
        w = z0 + t * step
        f, df, d2f = y
        d3f = -(((3.0 + e1) * w - (3.0 + f1)) * w * d2f + ((1.0 + e1 + e2) * w - b1b2) * df + e3 * f) / (w * w * (w - 1.0))
        return step * np.array([df, d2f, d3f])

    y0 = np.array([start.value, d1, d2], dtype=complex)
    sol = solve_ivp(rhs, (0.0, 1.0), y0, method="DOP853", rtol=CONTINUATION_RTOL, atol=CONTINUATION_ATOL)
    if not sol.success:
        raise SeriesDivergence(f"Continuation of 3F2 to z={z} failed: {sol.message}")
    return complex(sol.y[0, -1])


def hyper_3f2_continued(p, z):
    """3F2(A; B; z) anywhere off the cut [1, inf)."""
    return _continued(p.A, p.B, z)


def _upper_side(z):
    z = complex(z)
    return complex(z.real, 0.0) if z.imag == 0.0 else z


def _log_principal(z):
    return cmath.log(_upper_side(z))


def _log_minus(z):
    # log(-z) on the principal branch, z approached from the upper half-plane on [0, inf)
    z = _upper_side(z)
    arg = cmath.phase(z)
    arg = arg - math.pi if z.imag >= 0.0 else arg + math.pi
    return complex(math.log(abs(z)), arg)


def block_H(i, p, z):
    """
    Solutions at the origin.

    Args:
        i (int): 0, 1 or 2.
        p (BlockParams): Parameters.
        z (complex): Point off the cut (-inf, 0].

    Returns:
        complex: H0 = 3F2(A;B;z), H_i = z^(1-B_i) 3F2(1-B_i+A; ...; z) for i = 1, 2.
    """
    if i == 0:
        return hyper_3f2_continued(p, z)
    if i not in (1, 2):
        raise ValueError(f"block_H index must be 0, 1 or 2, got {i}")
    z = complex(z)
    if z == 0:
        return 0j if 1.0 - p.B[i - 1] > 0 else complex(math.inf)
    primed = p.primed(i)
    return cmath.exp((1.0 - p.B[i - 1]) * _log_principal(z)) * _continued(primed.A, primed.B, z)


def block_G(i, p, z):
    """
    Solutions at infinity.

    Args:
        i (int): 1, 2 or 3; parameter indices are taken mod 3.
        p (BlockParams): Parameters.
        z (complex): Point off the cut [0, inf).

    Returns:
        complex: G_i = (-z)^(-A_i) 3F2(A_i, 1+A_i-B1, 1+A_i-B2; 1+A_i-A_{i-1}, 1+A_i-A_{i+1}; 1/z).
    """
    if i not in (1, 2, 3):
        raise ValueError(f"block_G index must be 1, 2 or 3, got {i}")
    z = complex(z)
    if z == 0:
        raise DomainViolation("G_i is defined around infinity, not at z=0")
    upper, lower = p.at_infinity(i)
    return cmath.exp(-p.A[i - 1] * _log_minus(z)) * _continued(upper, lower, 1.0 / z)


def thomae_coefficients(p):
    """
    Coefficients k_a with 3F2(A; B; z) = sum_a k_a G_a(z).

    Returns:
        numpy.ndarray: (k_1, k_2, k_3).
    """
    b1, b2 = p.B
    coeffs = np.empty(3)
    for k in range(3):
        a = p.A[k]
        a_next = p.A[(k + 1) % 3]
        a_prev = p.A[(k - 1) % 3]
        coeffs[k] = (gamma_fn(b1) * gamma_fn(b2) * gamma_fn(a_next - a) * gamma_fn(a_prev - a)
                     * rgamma(a_next) * rgamma(a_prev) * rgamma(b1 - a) * rgamma(b2 - a))
    return coeffs


def thomae_connection_residual(p, z):
    """
    Relative residual of the connection between the series at 0 and the basis at infinity.

    Args:
        p (BlockParams): Generic parameters.
        z (complex): Point off [0, inf).

    Returns:
        float: |F(z) - sum_a k_a G_a(z)| / |F(z)|.

    Raises:
        NonGenericParameters: Integer parameter differences.
    """
    p.require_generic()
    lhs = hyper_3f2_continued(p, z)
    coeffs = thomae_coefficients(p)
    rhs = sum(coeffs[k] * block_G(k + 1, p, z) for k in range(3))
    return abs(lhs - rhs) / abs(lhs)


def crossing_coefficient_log(p, i):
    """
    Closed form of the coefficient lambda_i multiplying |H_i|^2 in the crossing-symmetric combination.

    lambda_i = l(B1) l(B2) l(B_i - 1) / (l(1 + B1 + B2 - 2B_i) prod_j l(A_j) l(B_i - A_j))

    Args:
        p (BlockParams): Parameters.
        i (int): 1 or 2.

    Returns:
        LogSignedReal: lambda_i.

    Raises:
        IntegerArgument: One of the l factors sits at an integer (B_i = 1 among others).
    """
    b1, b2 = p.B
    bi = p.B[i - 1]
    numerator = [l_func(b1, "l(B1)"), l_func(b2, "l(B2)"), l_func(bi - 1.0, f"l(B{i}-1)")]
    denominator = [l_func(1.0 + b1 + b2 - 2.0 * bi, f"l(1+B1+B2-2B{i})")]
    for j, a in enumerate(p.A, start=1):
        denominator.append(l_func(a, f"l(A{j})"))
        denominator.append(l_func(bi - a, f"l(B{i}-A{j})"))
    return product(numerator) / product(denominator)


def crossing_coefficient(p, i):
    """lambda_i as a float; see crossing_coefficient_log."""
    return crossing_coefficient_log(p, i).value


def crossing_coefficients_from_connection(p):
    """
    Coefficients (lambda_1, lambda_2), lambda_0 = 1, cancelling the cross terms G_a conj(G_b).

    Returns:
        numpy.ndarray: (lambda_1, lambda_2) from a least-squares solve of the three cancellation equations.
    """
    p.require_generic()
    k0, k1, k2 = (thomae_coefficients(p.primed(i)) for i in range(3))
    pairs = ((0, 1), (1, 2), (2, 0))
    matrix = np.array([[k1[a] * k1[b], k2[a] * k2[b]] for a, b in pairs])
    rhs = np.array([-k0[a] * k0[b] for a, b in pairs])
    solution, *_ = np.linalg.lstsq(matrix, rhs, rcond=None)
    return solution


def crossing_sine_identity(p, i, lambdas=None):
    """
    Relative residual of sin(pi A_i) sin pi(B1-B2) - t1 sin pi(B1-A_i) sin(pi B2) + t2 sin pi(B2-A_i) sin(pi B1).

    t_j = lambda_j / crossing_coefficient(p, j) rescales the supplied coefficients to the normalization in
    which the identity reads with unit weights, so the residual vanishes exactly when lambdas are the
    coefficients of the crossing-symmetric combination. The residual is divided by the largest of the
    three terms.

    Args:
        p (BlockParams): Generic parameters.
        i (int): 1, 2 or 3.
        lambdas (tuple): (lambda_1, lambda_2) obtained by any route, e.g. from the structure constants;
            defaults to the connection-matrix solve.

    Returns:
        float: Relative residual.
    """
    p.require_generic()
    if lambdas is None:
        lambdas = crossing_coefficients_from_connection(p)
    closed = np.array([crossing_coefficient(p, 1), crossing_coefficient(p, 2)])
    t1, t2 = np.asarray(lambdas, dtype=float) / closed
    a = p.A[i - 1]
    b1, b2 = p.B
    pi = math.pi
    terms = (math.sin(pi * a) * math.sin(pi * (b1 - b2)),
             -t1 * math.sin(pi * (b1 - a)) * math.sin(pi * b2),
             t2 * math.sin(pi * (b2 - a)) * math.sin(pi * b1))
    return abs(sum(terms)) / max(abs(term) for term in terms)


def _default_radius(z):
    z = complex(z)
    distances = [abs(z), abs(z - 1.0)]
    if z.imag != 0.0:
        distances.append(abs(z.imag))
    return min(CAUCHY_RADIUS, 0.4 * min(distances))


def cauchy_derivatives(f, z, order=3, radius=None, nodes=CAUCHY_NODES):
    """
    Derivatives f^(m)(z), m = 0..order, from the Cauchy integral on a circle, summed with an FFT.

    Args:
        f (callable): Holomorphic function near z.
        z (complex): Center.
        order (int): Highest derivative.
        radius (float): Circle radius; must keep the circle off cuts and singular points.
        nodes (int): Points on the circle.

    Returns:
        list: [f(z), f'(z), ..., f^(order)(z)].
    """
    z = complex(z)
    r = _default_radius(z) if radius is None else radius
    circle = z + r * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    values = np.array([f(w) for w in circle], dtype=complex)
    coeffs = np.fft.fft(values) / nodes
    return [coeffs[m] * math.factorial(m) / r ** m for m in range(order + 1)]


def ode_residual(p, f, z, radius=None):
    """
    Normalized residual of the hypergeometric equation applied to f at z.

    Uses z^2(z-1)f''' + [(3+e1)z^2 - (3+f1)z]f'' + [(1+e1+e2)z - B1B2]f' + e3 f, where e_k are the
    elementary symmetric polynomials of A and f1 = B1 + B2 - 2.

    Args:
        p (BlockParams): Parameters of the equation.
        f (callable): Candidate solution, e.g. lambda w: block_H(1, p, w).
        z (complex): Evaluation point away from 0, 1 and the cuts of f.
        radius (float): Optional Cauchy circle radius.

    Returns:
        float: |sum of terms| / max |term|.
    """
    z = complex(z)
    f0, f1, f2, f3 = cauchy_derivatives(f, z, order=3, radius=radius)
    e1, e2, e3, shift, b1b2 = _ode_rhs_coefficients(p.A, p.B)
    terms = np.array([
        z * z * (z - 1.0) * f3,
        ((3.0 + e1) * z * z - (3.0 + shift) * z) * f2,
        ((1.0 + e1 + e2) * z - b1b2) * f1,
        e3 * f0,
    ])
    scale = np.max(np.abs(terms))
    return float(abs(terms.sum()) / scale) if scale > 0 else 0.0


def crossing_combination(p, coeffs, z):
    """
    C (|H0|^2 + A1 |H1|^2 + A2 |H2|^2).

    Args:
        p (BlockParams): Parameters.
        coeffs (CrossingCoefficients): C, A1, A2.
        z (complex): Point off the cut (-inf, 0].

    Returns:
        float: The four-point combination.
    """
    h = [block_H(i, p, z) for i in range(3)]
    return coeffs.C * (abs(h[0]) ** 2 + coeffs.A1 * abs(h[1]) ** 2 + coeffs.A2 * abs(h[2]) ** 2)


def closed_form_coefficients(p, C=1.0):
    """Crossing coefficients from the closed l-products."""
    return CrossingCoefficients(C, crossing_coefficient(p, 1), crossing_coefficient(p, 2))
