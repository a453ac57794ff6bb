# app/exceptions.py


class TodaCftError(Exception):
    """Base class for every error raised by the library."""


class WallDegeneracy(TodaCftError):
    """The weight sits on a Weyl chamber wall, so the chamber representative is ambiguous."""


class PoleAtNonPositiveInteger(TodaCftError):
    """log Gamma was asked for its value at 0, -1, -2, ..."""


class IntegerArgument(TodaCftError):
    """
    l(x) = Gamma(x)/Gamma(1-x) evaluated at an integer.

    Attributes:
        value (float): The offending argument.
        kind (str): "pole" for x in {0,-1,...}, "zero" for x in {1,2,...}.
        factor (str): Optional label of the factor that produced the argument.
    """

    def __init__(self, value, kind, factor=None):
        self.value = value
        self.kind = kind
        self.factor = factor
        label = f" in factor {factor}" if factor else ""
        super().__init__(f"l({value}) is a {kind}{label}")


class GammaPole(TodaCftError):
    """A Gamma factor of a reflection coefficient hit a pole."""

    def __init__(self, factor, value):
        self.factor = factor
        self.value = value
        super().__init__(f"Gamma pole in factor {factor} at argument {value}")


class DomainViolation(TodaCftError):
    """Arguments outside the domain where a formula or quadrature is defined."""


class SeriesDivergence(TodaCftError):
    """The 3F2 series was requested outside its summation disc."""


class BParameterNonPositiveInteger(TodaCftError):
    """A lower 3F2 parameter is 0, -1, -2, ..."""


class NonGenericParameters(TodaCftError):
    """Parameter differences are integers, so the connection data is singular."""

    def __init__(self, pairs):
        self.pairs = list(pairs)
        super().__init__(f"Non-generic parameter differences: {', '.join(self.pairs)}")


class CoincidentPoints(TodaCftError):
    """The Green kernel was evaluated on its diagonal."""


class NotPositiveDefinite(TodaCftError):
    """The regularized covariance matrix failed the Cholesky factorization."""

    def __init__(self, smallest_eigenvalue):
        self.smallest_eigenvalue = smallest_eigenvalue
        super().__init__(f"Covariance matrix is not positive definite (smallest eigenvalue {smallest_eigenvalue:.3e}); coarsen the regularization")


class MomentViolation(TodaCftError):
    """The GMC moment entering the estimator is infinite for these weights."""


class WindowViolation(TodaCftError):
    """Weights outside the window of the extended Liouville representation."""


class ConfigError(TodaCftError):
    """Invalid run configuration."""


class SeibergWarning(UserWarning):
    """Seiberg bounds fail: the GMC estimator may have infinite variance."""


class DiscretizationWarning(UserWarning):
    """The discretization drops or distorts part of the GMC integral."""


class SingularEvaluation(TodaCftError):
    """A structure constant entering a check is an exact zero or a pole."""

    def __init__(self, what, flags):
        self.flags = list(flags)
        super().__init__(f"{what} is singular: {', '.join(self.flags)}")
