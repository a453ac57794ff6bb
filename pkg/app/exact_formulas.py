# app/exact_formulas.py
"""
Closed-form structure constants of sl3 Toda theory and the identities tying them together.

Every structure constant is returned as a LogSignedReal: the Upsilon products overflow
double range at moderate weights, and exact zeros / poles are part of the answer.
"""
from dataclasses import dataclass, replace
import logging
import math

from scipy import integrate
from scipy.special import gamma as gamma_fn
from scipy.special import hyp2f1, rgamma

from .constants import SQRT2, WALL_TOLERANCE
from .exceptions import (
    DomainViolation,
    GammaPole,
    IntegerArgument,
    PoleAtNonPositiveInteger,
    SingularEvaluation,
    WallDegeneracy,
)
from .hypergeometric_blocks import BlockParams, crossing_coefficient_log, crossing_sine_identity
from .root_system import (
    E1,
    E2,
    H,
    IDENTITY,
    OMEGA1,
    OMEGA2,
    POSITIVE_ROOTS,
    RHO,
    TodaParams,
    WeightVector,
    dominant_representative,
    pairing,
    shifted_action,
)
from .special_functions import (
    LogSignedReal,
    l_func,
    log_gamma_real,
    product,
    upsilon,
    upsilon_prime_zero,
    upsilon_shift_factor,
)


@dataclass(frozen=True)
class ThreePointInput:
    """
    Weights of a three-point function with a semi-degenerate middle insertion.

    Attributes:
        alpha0 (WeightVector): Insertion at 0.
        kappa (float): alpha1 = kappa * omega2 sits at 1.
        alpha_inf (WeightVector): Insertion at infinity.
        params (TodaParams): Couplings.
    """
    alpha0: WeightVector
    kappa: float
    alpha_inf: WeightVector
    params: TodaParams

    @property
    def alpha1(self):
        return self.kappa * OMEGA2

    @property
    def alpha_bar(self):
        return self.alpha0 + self.alpha1 + self.alpha_inf

    @property
    def s_vector(self):
        """s = alpha0 + alpha1 + alpha_inf - 2Q."""
        return self.alpha_bar - 2.0 * self.params.Q

    @property
    def s_exponents(self):
        """(s_1, s_2) with s_i = <s, omega_i> / gamma."""
        s = self.s_vector
        return pairing(s, OMEGA1) / self.params.gamma, pairing(s, OMEGA2) / self.params.gamma

    @property
    def insertions(self):
        return self.alpha0, self.alpha1, self.alpha_inf

    def with_alpha0(self, alpha0):
        return replace(self, alpha0=alpha0)

    def with_kappa(self, kappa):
        return replace(self, kappa=kappa)

    def with_params(self, params):
        return replace(self, params=params)

    def to_json(self):
        return {
            "gamma": self.params.gamma,
            "mu": list(self.params.mu),
            "alpha0": self.alpha0.to_json(),
            "kappa": self.kappa,
            "alpha_inf": self.alpha_inf.to_json(),
        }


@dataclass(frozen=True)
class ShiftCoefficients:
    """
    Parameters of the hypergeometric equation satisfied by the four-point function
    with a degenerate insertion -chi*omega1.

    Attributes:
        A (tuple): A_1, A_2, A_3.
        B (tuple): B_1, B_2.
        chi (float): gamma or 2/gamma.
    """
    A: tuple
    B: tuple
    chi: float

    def block_params(self):
        return BlockParams(self.A, self.B)


@dataclass(frozen=True)
class DozzLimit:
    limit_ratio: float
    residual: float
    slope: float
    epsilons: tuple
    ratios: tuple
    target: LogSignedReal


@dataclass(frozen=True)
class FateevIntegral:
    closed: float
    quadrature: float
    residual: float


def relative_residual(value, reference):
    """|value/reference - 1| for two LogSignedReal numbers."""
    if not (value.is_finite and reference.is_finite):
        if value.flags == reference.flags and not value.is_indeterminate:
            return 0.0 if value.sign == reference.sign else math.inf
        return math.inf
    delta = value.log_abs - reference.log_abs
    if value.sign == reference.sign:
        return abs(math.expm1(delta))
    return math.exp(delta) + 1.0


def _require_finite(value, what):
    if not value.is_finite:
        raise SingularEvaluation(what, value.flags)
    return value


def _check_chi(chi, params):
    gamma = params.gamma
    if not (math.isclose(chi, gamma, rel_tol=1e-12) or math.isclose(chi, 2.0 / gamma, rel_tol=1e-12)):
        raise DomainViolation(f"chi must be gamma or 2/gamma, got {chi}")


def _liouville_like_prefactor(params):
    gamma = params.gamma
    if not math.isclose(params.mu[0], params.mu[1], rel_tol=1e-15):
        raise DomainViolation(f"The Fateev-Litvinov formula needs mu1 == mu2, got {params.mu}")
    base = math.pi * params.mu[0] * l_func(gamma ** 2 / 2.0).value * (gamma / SQRT2) ** (2.0 - gamma ** 2)
    return base


def fateev_litvinov(inp):
    """
    Fateev-Litvinov three-point function.

    (pi mu l(gamma^2/2) (gamma/sqrt2)^(2-gamma^2))^(<2Q - alpha_bar, rho>/gamma)
    * Upsilon'(0)^2 Upsilon(kappa) prod_e Upsilon(<Q - alpha0, e>) Upsilon(<Q - alpha_inf, e>)
    / prod_{j,k} Upsilon(kappa/3 + <alpha0 - Q, h_j> + <alpha_inf - Q, h_k>)

    Args:
        inp (ThreePointInput): Weights and couplings, mu1 == mu2.

    Returns:
        LogSignedReal: The value; zero / pole / indeterminate are reported through its flags.
    """
    params = inp.params
    gamma = params.gamma
    Q = params.Q
    base = _liouville_like_prefactor(params)
    exponent = pairing(2.0 * Q - inp.alpha_bar, RHO) / gamma
    up0 = LogSignedReal.from_float(upsilon_prime_zero(gamma))

    numerator = [LogSignedReal(exponent * math.log(base), 1), up0, up0, upsilon(inp.kappa, gamma)]
    for e in POSITIVE_ROOTS:
        numerator.append(upsilon(pairing(Q - inp.alpha0, e), gamma))
        numerator.append(upsilon(pairing(Q - inp.alpha_inf, e), gamma))
    a = [pairing(inp.alpha0 - Q, h) for h in H]
    b = [pairing(inp.alpha_inf - Q, h) for h in H]
    denominator = [upsilon(inp.kappa / 3.0 + aj + bk, gamma) for aj in a for bk in b]
    return product(numerator) / product(denominator)


def reflection_A(alpha, params):
    """
    A(alpha) = prod_i (mu_i pi l(gamma^2/2))^(<alpha, omega_i>/gamma)
               prod_{e > 0} Gamma(1 - gamma/2 <alpha, e>) Gamma(1 - <alpha, e>/gamma)

    Args:
        alpha (WeightVector): Argument (alpha - Q in reflection coefficients).
        params (TodaParams): Couplings; mu1 and mu2 enter separately.

    Returns:
        LogSignedReal: A(alpha).

    Raises:
        GammaPole: A Gamma factor sits at a pole.
    """
    gamma = params.gamma
    lg = l_func(gamma ** 2 / 2.0).value
    factors = []
    for mu_i, omega in zip(params.mu, (OMEGA1, OMEGA2)):
        factors.append(LogSignedReal(pairing(alpha, omega) / gamma * math.log(mu_i * math.pi * lg), 1))
    for name, e in zip(("e1", "e2", "e1+e2"), POSITIVE_ROOTS):
        for label, arg in ((f"Gamma(1-gamma/2<alpha,{name}>)", 1.0 - gamma / 2.0 * pairing(alpha, e)),
                           (f"Gamma(1-<alpha,{name}>/gamma)", 1.0 - pairing(alpha, e) / gamma)):
            try:
                factors.append(log_gamma_real(arg))
            except PoleAtNonPositiveInteger:
                raise GammaPole(label, arg)
    return product(factors)


def reflection_coeff(s, alpha, params):
    """R_s(alpha) = epsilon(s) A(s(alpha - Q)) / A(alpha - Q)."""
    shifted = alpha - params.Q
    ratio = reflection_A(s.apply(shifted), params) / reflection_A(shifted, params)
    return ratio * LogSignedReal(0.0, s.sign)


def liouville_reflection(alpha, gamma, mu):
    """
    Liouville reflection coefficient with Q = gamma/2 + 2/gamma.

    R(alpha) = -(pi mu l(gamma^2/4))^(2(Q-alpha)/gamma)
               Gamma(2(alpha-Q)/gamma) Gamma(gamma(alpha-Q)/2) / (Gamma(2(Q-alpha)/gamma) Gamma(gamma(Q-alpha)/2))

    Raises:
        WallDegeneracy: alpha = Q, where the expression is a removable 0/0.
        GammaPole: A Gamma factor sits at a pole.
    """
    if not 0.0 < gamma < 2.0:
        raise DomainViolation(f"Liouville coupling must lie in (0, 2), got {gamma}")
    Q = gamma / 2.0 + 2.0 / gamma
    d = alpha - Q
    if abs(d) <= WALL_TOLERANCE * (1.0 + abs(alpha)):
        raise WallDegeneracy("R(Q) is a removable 0/0 and equals -1 by continuity")
    prefactor = LogSignedReal(-2.0 * d / gamma * math.log(math.pi * mu * l_func(gamma ** 2 / 4.0).value), -1)
    factors = []
    for label, arg in (("Gamma(2(alpha-Q)/gamma)", 2.0 * d / gamma), ("Gamma(gamma(alpha-Q)/2)", gamma * d / 2.0),
                       ("Gamma(2(Q-alpha)/gamma)", -2.0 * d / gamma), ("Gamma(gamma(Q-alpha)/2)", -gamma * d / 2.0)):
        try:
            factors.append(log_gamma_real(arg))
        except PoleAtNonPositiveInteger:
            raise GammaPole(label, arg)
    return prefactor * factors[0] * factors[1] / (factors[2] * factors[3])


def _upsilon_b(x, gamma_tilde):
    return upsilon(SQRT2 * x, gamma_tilde / SQRT2)


def _dozz_prefactor_base(gamma_tilde, mu):
    return math.pi * mu * l_func(gamma_tilde ** 2 / 4.0).value * (gamma_tilde / 2.0) ** (2.0 - gamma_tilde ** 2 / 2.0)


def dozz(a1, a2, a3, gamma_tilde, mu):
    """
    DOZZ structure constant of Liouville theory with coupling gamma_tilde in (0, 2).

    (pi mu l(gt^2/4)(gt/2)^(2-gt^2/2))^((2Q - sum a)/gt) Upsilon_b'(0) prod_k Upsilon_b(a_k)
    / (Upsilon_b((sum a - 2Q)/2) prod_k Upsilon_b(sum a/2 - a_k)),
    with b = gt/2, Q = gt/2 + 2/gt and Upsilon_b(x) = Upsilon(sqrt2 x) at gamma = gt/sqrt2.

    Returns:
        LogSignedReal: The value; a vanishing denominator shows up as a pole.
    """
    if not 0.0 < gamma_tilde < 2.0:
        raise DomainViolation(f"Liouville coupling must lie in (0, 2), got {gamma_tilde}")
    Q = gamma_tilde / 2.0 + 2.0 / gamma_tilde
    total = a1 + a2 + a3
    base = _dozz_prefactor_base(gamma_tilde, mu)
    numerator = [
        LogSignedReal((2.0 * Q - total) / gamma_tilde * math.log(base), 1),
        LogSignedReal.from_float(SQRT2 * upsilon_prime_zero(gamma_tilde / SQRT2)),
    ]
    numerator += [_upsilon_b(a, gamma_tilde) for a in (a1, a2, a3)]
    denominator = [_upsilon_b((total - 2.0 * Q) / 2.0, gamma_tilde)]
    denominator += [_upsilon_b(total / 2.0 - a, gamma_tilde) for a in (a1, a2, a3)]
    return product(numerator) / product(denominator)


def check_dozz_shift(a, gamma_tilde, mu):
    """
    Residual of the DOZZ ratio under a1 -> a1 + gamma_tilde against the Upsilon shift factors.

    Args:
        a (tuple): (a1, a2, a3).
        gamma_tilde (float): Liouville coupling.
        mu (float): Cosmological constant.

    Returns:
        float: Relative residual.
    """
    a1, a2, a3 = a
    b = gamma_tilde / 2.0
    g = gamma_tilde / SQRT2
    Q = b + 2.0 / gamma_tilde
    total = a1 + a2 + a3

    def shift(x):
        return upsilon_shift_factor(SQRT2 * x, g, g).to_signed_real()

    expected = (LogSignedReal(-math.log(_dozz_prefactor_base(gamma_tilde, mu)), 1)
                * shift(a1) * shift(a1 + b) * shift(total / 2.0 - a1 - b)
                / (shift((total - 2.0 * Q) / 2.0) * shift(total / 2.0 - a2) * shift(total / 2.0 - a3)))
    ratio = dozz(a1 + gamma_tilde, a2, a3, gamma_tilde, mu) / dozz(a1, a2, a3, gamma_tilde, mu)
    return relative_residual(ratio, expected)


def shift_coefficients(chi, inp):
    """
    A_i = chi/2 <alpha0 + alpha1 - chi*omega1 - Q, h1> + chi/2 <alpha_inf - Q, h_i>
    B_i = 1 + chi/2 <alpha0 - Q, h1 - h_{i+1}>

    Returns:
        ShiftCoefficients: Parameters of the hypergeometric equation for this chi.
    """
    params = inp.params
    _check_chi(chi, params)
    Q = params.Q
    h1 = H[0]
    common = chi / 2.0 * pairing(inp.alpha0 + inp.alpha1 - chi * OMEGA1 - Q, h1)
    A = tuple(common + chi / 2.0 * pairing(inp.alpha_inf - Q, h) for h in H)
    B = tuple(1.0 + chi / 2.0 * pairing(inp.alpha0 - Q, h1 - H[i]) for i in (1, 2))
    return ShiftCoefficients(A, B, chi)


def _shift_coeff_A_log(i, chi, inp):
    return crossing_coefficient_log(shift_coefficients(chi, inp).block_params(), i)


def shift_coeff_A(i, chi, inp):
    """
    Coefficient A^(i) of |H_i|^2 in the four-point function, normalized by the |H_0|^2 one.

    Raises:
        IntegerArgument: An l factor sits at an integer; B_i = 1 gives l(0).
    """
    return _shift_coeff_A_log(i, chi, inp).value


def _shift_coeff_B_log(i, alpha0, chi, params):
    if i == 0:
        return LogSignedReal.one()
    _check_chi(chi, params)
    gamma = params.gamma
    if not math.isclose(params.mu[0], params.mu[1], rel_tol=1e-15):
        raise DomainViolation(f"B^(i) is defined for mu1 == mu2, got {params.mu}")
    power = LogSignedReal(chi / gamma * math.log(math.pi * params.mu[0] * l_func(gamma ** 2 / 2.0).value)
                          + 2.0 * math.log(chi ** 2 / 2.0), 1)
    factors = []
    for j in range(1, i + 1):
        x = chi / 2.0 * pairing(alpha0 - params.Q, H[j - 1] - H[i])
        factors.append(power)
        factors.append(l_func(x, f"l(chi/2<alpha0-Q,h{j}-h{i + 1}>)"))
        factors.append(l_func(1.0 + chi ** 2 / 2.0 + x, f"l(1+chi^2/2+chi/2<alpha0-Q,h{j}-h{i + 1}>)").inverse())
    return product(factors)


def shift_coeff_B(i, alpha0, chi, params):
    """
    B^(i) = prod_{j<=i} (pi mu l(gamma^2/2))^(chi/gamma) (chi^2/2)^2
            l(chi/2 <alpha0-Q, h_j - h_{i+1}>) / l(1 + chi^2/2 + chi/2 <alpha0-Q, h_j - h_{i+1}>)

    B^(0) = 1.
    """
    return _shift_coeff_B_log(i, alpha0, chi, params).value


def check_shift_equation(i, chi, inp):
    """
    Relative residual of F(alpha0 - chi h_{i+1}) / F(alpha0 - chi h_1) = A^(i) / B^(i).

    Raises:
        IntegerArgument: Degenerate coefficients.
        SingularEvaluation: One of the structure constants is a zero or a pole.
    """
    shifted = _require_finite(fateev_litvinov(inp.with_alpha0(inp.alpha0 - chi * H[i])), f"F(alpha0 - chi h{i + 1})")
    base = _require_finite(fateev_litvinov(inp.with_alpha0(inp.alpha0 - chi * H[0])), "F(alpha0 - chi h1)")
    expected = _shift_coeff_A_log(i, chi, inp) / _shift_coeff_B_log(i, inp.alpha0, chi, inp.params)
    return relative_residual(shifted / base, expected)


def crossing_coefficients_from_structure_constants(chi, inp):
    """
    (lambda_1, lambda_2) of the four-point function read off the structure constants,
    lambda_i = B^(i) F(alpha0 - chi h_{i+1}) / F(alpha0 - chi h_1).

    Raises:
        SingularEvaluation: One of the structure constants is a zero or a pole.
    """
    base = _require_finite(fateev_litvinov(inp.with_alpha0(inp.alpha0 - chi * H[0])), "F(alpha0 - chi h1)")
    lambdas = []
    for i in (1, 2):
        shifted = _require_finite(fateev_litvinov(inp.with_alpha0(inp.alpha0 - chi * H[i])),
                                  f"F(alpha0 - chi h{i + 1})")
        lambdas.append((_shift_coeff_B_log(i, inp.alpha0, chi, inp.params) * shifted / base).value)
    return tuple(lambdas)


def check_crossing_sine_identity(i, chi, inp):
    """crossing_sine_identity of the shift parameters, fed with the structure-constant coefficients."""
    p = shift_coefficients(chi, inp).block_params()
    return crossing_sine_identity(p, i, crossing_coefficients_from_structure_constants(chi, inp))


def extended_three_point(inp):
    """
    Weyl-covariant evaluation R_s(alpha0) F(s^alpha0) with s(alpha0 - Q) in the negative chamber.

    Raises:
        WallDegeneracy: alpha0 - Q on a chamber wall.
    """
    s, representative = dominant_representative(inp.alpha0, inp.params)
    if s is IDENTITY:
        return fateev_litvinov(inp)
    return reflection_coeff(s, inp.alpha0, inp.params) * fateev_litvinov(inp.with_alpha0(representative))


def check_weyl_covariance(s, inp):
    """Relative residual of F(alpha0) = R_s(alpha0) F(s^alpha0)."""
    direct = fateev_litvinov(inp)
    reflected = reflection_coeff(s, inp.alpha0, inp.params) * fateev_litvinov(
        inp.with_alpha0(shifted_action(s, inp.alpha0, inp.params)))
    return relative_residual(reflected, direct)


def check_reflection_cocycle(s_outer, s_inner, alpha, params, shifted=True):
    """
    Residual of R_{s'}(s alpha) R_s(alpha) = R_{s's}(alpha).

    With shifted=True the inner image is the affine action around Q, otherwise the linear one.
    """
    image = shifted_action(s_inner, alpha, params) if shifted else s_inner.apply(alpha)
    lhs = reflection_coeff(s_outer, image, params) * reflection_coeff(s_inner, alpha, params)
    rhs = reflection_coeff(s_outer.compose(s_inner), alpha, params)
    return relative_residual(lhs, rhs)


def mu_exponent(inp):
    """Exponent <2Q - alpha_bar, rho>/gamma of mu in the Fateev-Litvinov formula."""
    return pairing(2.0 * inp.params.Q - inp.alpha_bar, RHO) / inp.params.gamma


def check_mu_scaling(inp, lam):
    """|log F(lam mu) - log F(mu) - exponent * log lam|."""
    scaled = inp.with_params(inp.params.with_mu(tuple(lam * m for m in inp.params.mu)))
    delta = fateev_litvinov(scaled).log_abs - fateev_litvinov(inp).log_abs
    return abs(delta - mu_exponent(inp) * math.log(lam))


def seiberg_report(inp):
    """
    Both halves of the Seiberg bounds.

    Returns:
        dict: {"insertions": {name: [bool, bool]}, "s_positive": [bool, bool], "satisfied": bool}
    """
    Q = inp.params.Q
    insertions = {}
    for name, alpha in zip(("alpha0", "alpha1", "alpha_inf"), inp.insertions):
        insertions[name] = [pairing(alpha - Q, e) < 0.0 for e in (E1, E2)]
    s_positive = [pairing(inp.s_vector, w) > 0.0 for w in (OMEGA1, OMEGA2)]
    satisfied = all(all(v) for v in insertions.values()) and all(s_positive)
    return {"insertions": insertions, "s_positive": s_positive, "satisfied": satisfied}


def dozz_limit_kappa(inp):
    """kappa making <s, omega1> vanish."""
    return -3.0 * pairing(inp.alpha0 + inp.alpha_inf - 2.0 * inp.params.Q, OMEGA1)


def dozz_limit_target(inp):
    """(1/sqrt2) DOZZ at coupling sqrt2*gamma and weights <alpha_k, e2>/sqrt2, at kappa = kappa0."""
    kappa0 = dozz_limit_kappa(inp)
    a = (pairing(inp.alpha0, E2) / SQRT2, kappa0 / SQRT2, pairing(inp.alpha_inf, E2) / SQRT2)
    value = dozz(*a, SQRT2 * inp.params.gamma, inp.params.mu[0])
    return value * LogSignedReal(-0.5 * math.log(2.0), 1)


def _lagrange_at_zero(xs, ys):
    total = 0.0
    for k, (xk, yk) in enumerate(zip(xs, ys)):
        weight = 1.0
        for j, xj in enumerate(xs):
            if j != k:
                weight *= xj / (xj - xk)
        total += weight * yk
    return total


def check_dozz_limit(inp, epsilons):
    """
    Extrapolate <s, omega1> F as <s, omega1> -> 0 and compare with the DOZZ formula.

    For each eps the middle weight is set to kappa = kappa0 + 3 eps, so that <s, omega1> = eps.
    The ratios eps F / target are extrapolated to eps = 0 by polynomial interpolation.

    Args:
        inp (ThreePointInput): Supplies alpha0, alpha_inf and the couplings; its kappa is ignored.
        epsilons (list): Distinct small positive values.

    Returns:
        DozzLimit: Extrapolated ratio, its distance to 1 and the linear slope in eps.
    """
    epsilons = tuple(float(e) for e in epsilons)
    if len(set(epsilons)) < 2:
        raise DomainViolation("At least two distinct epsilons are needed")
    kappa0 = dozz_limit_kappa(inp)
    target = _require_finite(dozz_limit_target(inp), "DOZZ target")
    if pairing(inp.with_kappa(kappa0).s_vector, OMEGA2) <= 0.0:
        logging.warning("<s, omega2> <= 0 at the DOZZ limit point; the limit holds for the exact formula only")
    ratios = []
    for eps in epsilons:
        value = _require_finite(fateev_litvinov(inp.with_kappa(kappa0 + 3.0 * eps)), f"F at eps={eps}")
        scaled = value * LogSignedReal.from_float(eps) / target
        ratios.append(scaled.value)
    limit = _lagrange_at_zero(epsilons, ratios)
    e_far, e_near = max(epsilons), min(epsilons)
    slope = (ratios[epsilons.index(e_far)] - limit) / e_far
    if not math.isfinite(limit):
        raise SingularEvaluation("DOZZ limit extrapolation", ["indeterminate"])
    logging.debug(f"DOZZ limit ratios {ratios} near eps={e_near}, extrapolated {limit}")
    return DozzLimit(limit, abs(limit - 1.0), slope, epsilons, tuple(ratios), target)


def fateev_integral(a, b):
    """
    Compare int_C (|x-1|^b - r_{a,b}(x)) |x|^(-a) d^2x with pi l(-1+(a-b)/2) / (l(-b/2) l(a/2)).

    The subtraction r_{a,b} = |x|^b (1_{a-b<2} + 1_{a-b<1} (b/2)(1/x + 1/conj(x))) has a dipole part
    whose circle averages vanish, so in polar coordinates only |x|^b 1_{a-b<2} survives.
    Circle averages of |x-1|^b are 2F1(-b/2, -b/2; 1; r^2) inside the unit circle and
    r^b 2F1(-b/2, -b/2; 1; r^-2) outside; the radial integral is adaptive, split at 1/2, 1 and 2.

    Args:
        a (float): Exponent at 0, a < 2.
        b (float): Exponent at 1, b > -2.

    Returns:
        FateevIntegral: Closed form, quadrature and relative residual.

    Raises:
        DomainViolation: Outside a < 2, b > -2, a - b in (0, inf) minus {1, 2}.
    """
    d = a - b
    if not (a < 2.0 and b > -2.0 and d > 0.0) or abs(d - 1.0) < 1e-12 or abs(d - 2.0) < 1e-12:
        raise DomainViolation(f"fateev_integral needs a<2, b>-2, a-b in (0,inf)\\{{1,2}}; got a={a}, b={b}")
    c = -1.0 + d / 2.0
    closed = (math.pi * gamma_fn(c) * rgamma(1.0 - c)
              * rgamma(-b / 2.0) * gamma_fn(1.0 + b / 2.0)
              * rgamma(a / 2.0) * gamma_fn(1.0 - a / 2.0))
    subtract = 1.0 if d < 2.0 else 0.0

    def circle_average(r):
        if r < 1.0:
            return hyp2f1(-b / 2.0, -b / 2.0, 1.0, r * r)
        return r ** b * hyp2f1(-b / 2.0, -b / 2.0, 1.0, 1.0 / (r * r))

    def radial(r):
        return 2.0 * math.pi * r ** (1.0 - a) * (circle_average(r) - subtract * r ** b)

    pieces = []
    for lo, hi in ((0.0, 0.5), (0.5, 1.0), (1.0, 2.0), (2.0, math.inf)):
        value, error = integrate.quad(radial, lo, hi, epsabs=1e-12, epsrel=1e-10, limit=500)
        pieces.append(value)
    quadrature = math.fsum(pieces)
    residual = abs(quadrature - closed) / abs(closed) if closed != 0.0 else abs(quadrature)
    return FateevIntegral(float(closed), quadrature, residual)
