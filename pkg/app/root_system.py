# app/root_system.py
"""
sl3 Cartan-space linear algebra.

Weights are stored in a fixed Euclidean embedding of the Cartan plane in which
the simple roots read e1 = (sqrt2, 0) and e2 = (-1/sqrt2, sqrt(3/2)). The Gram
pairing is then the plain dot product and Weyl elements are orthogonal matrices.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .constants import SQRT2, SQRT3_2, WALL_TOLERANCE
from .exceptions import DomainViolation, WallDegeneracy


@dataclass(frozen=True)
class WeightVector:
    """
    A point of the sl3 Cartan space.

    Attributes:
        x (float): First Euclidean coordinate.
        y (float): Second Euclidean coordinate.
    """
    x: float
    y: float

    @classmethod
    def from_roots(cls, c1, c2):
        """Build c1*e1 + c2*e2."""
        return c1 * E1 + c2 * E2

    @classmethod
    def from_omegas(cls, c1, c2):
        """Build c1*omega1 + c2*omega2."""
        return c1 * OMEGA1 + c2 * OMEGA2

    @classmethod
    def from_json(cls, data):
        """
        Parse {"basis": "omega"|"root"|"euclid", "coords": [x, y]}.

        Raises:
            DomainViolation: Unknown basis or malformed coordinates.
        """
        try:
            basis = data.get("basis", "euclid")
            c1, c2 = (float(c) for c in data["coords"])
        except (AttributeError, KeyError, TypeError, ValueError) as e:
            raise DomainViolation(f"Malformed weight {data!r}: {str(e)}")
        if basis == "omega":
            return cls.from_omegas(c1, c2)
        if basis == "root":
            return cls.from_roots(c1, c2)
        if basis == "euclid":
            return cls(c1, c2)
        raise DomainViolation(f"Unknown weight basis {basis!r}")

    def to_json(self, basis="omega"):
        if basis == "omega":
            coords = self.omega_coords()
        elif basis == "root":
            coords = self.root_coords()
        else:
            coords = (self.x, self.y)
        return {"basis": basis, "coords": [float(c) for c in coords]}

    def root_coords(self):
        """Coefficients on (e1, e2); the dual basis of (omega1, omega2)."""
        return pairing(self, OMEGA1), pairing(self, OMEGA2)

    def omega_coords(self):
        """Coefficients on (omega1, omega2), i.e. the pairings with e1, e2."""
        return pairing(self, E1), pairing(self, E2)

    def as_array(self):
        return np.array([self.x, self.y])

    def norm(self):
        return math.sqrt(pairing(self, self))

    def __add__(self, other):
        return WeightVector(self.x + other.x, self.y + other.y)

    def __sub__(self, other):
        return WeightVector(self.x - other.x, self.y - other.y)

    def __neg__(self):
        return WeightVector(-self.x, -self.y)

    def __mul__(self, scalar):
        return WeightVector(scalar * self.x, scalar * self.y)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return WeightVector(self.x / scalar, self.y / scalar)


def pairing(u, v):
    """
    Gram pairing <u, v>, a dot product in the embedding.

    Args:
        u (WeightVector): First weight.
        v (WeightVector): Second weight.

    Returns:
        float: The pairing.
    """
    return u.x * v.x + u.y * v.y


# Simple roots, fundamental weights, Weyl vector
E1 = WeightVector(SQRT2, 0.0)
E2 = WeightVector(-1.0 / SQRT2, SQRT3_2)
OMEGA1 = WeightVector((2.0 * E1.x + E2.x) / 3.0, (2.0 * E1.y + E2.y) / 3.0)
OMEGA2 = WeightVector((E1.x + 2.0 * E2.x) / 3.0, (E1.y + 2.0 * E2.y) / 3.0)
RHO = E1 + E2

# Weights of the first fundamental representation
H1 = OMEGA1
H2 = (E2 - E1) / 3.0
H3 = -(E1 + 2.0 * E2) / 3.0
H = (H1, H2, H3)

SIMPLE_ROOTS = (E1, E2)
POSITIVE_ROOTS = (E1, E2, E1 + E2)


@dataclass(frozen=True)
class TodaParams:
    """
    Coupling constants of the theory.

    Attributes:
        gamma (float): Coupling in (0, sqrt2).
        mu (tuple): Cosmological constants (mu1, mu2), both positive.
    """
    gamma: float
    mu: tuple = (1.0, 1.0)
    q: float = field(init=False)
    Q: WeightVector = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.gamma < SQRT2:
            raise DomainViolation(f"gamma must lie in (0, sqrt2), got {self.gamma}")
        mu = tuple(float(m) for m in self.mu)
        if len(mu) != 2 or min(mu) <= 0.0:
            raise DomainViolation(f"mu must be two positive numbers, got {self.mu}")
        object.__setattr__(self, "mu", mu)
        q = self.gamma + 2.0 / self.gamma
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "Q", q * RHO)

    def with_mu(self, mu):
        return TodaParams(self.gamma, tuple(mu))


@dataclass(frozen=True)
class WeylElement:
    """
    One of the six elements of the sl3 Weyl group.

    Attributes:
        word (str): Reduced word, "s1s2" meaning s1 after s2.
        matrix (tuple): Row-major 2x2 orthogonal matrix in the embedding.
        sign (int): epsilon(s) = det.
    """
    word: str
    matrix: tuple
    sign: int

    def as_array(self):
        return np.array(self.matrix)

    def apply(self, v):
        (a, b), (c, d) = self.matrix
        return WeightVector(a * v.x + b * v.y, c * v.x + d * v.y)

    def compose(self, other):
        """Return self o other."""
        return _lookup(self.as_array() @ other.as_array())

    def inverse(self):
        return _lookup(self.as_array().T)

    def __repr__(self):
        return f"WeylElement({self.word})"


def _simple_reflection_matrix(root):
    r = root.as_array()
    return np.eye(2) - np.outer(r, r)


def _build_weyl_group():
    s1 = _simple_reflection_matrix(E1)
    s2 = _simple_reflection_matrix(E2)
    words = {
        "Id": np.eye(2),
        "s1": s1,
        "s2": s2,
        "s1s2": s1 @ s2,
        "s2s1": s2 @ s1,
        "s1s2s1": s1 @ s2 @ s1,
    }
    group = []
    for word, m in words.items():
        sign = int(round(np.linalg.det(m)))
        group.append(WeylElement(word, tuple(tuple(float(c) for c in row) for row in m), sign))
    return tuple(group)


WEYL_GROUP = _build_weyl_group()
IDENTITY, S1, S2, S1S2, S2S1, S1S2S1 = WEYL_GROUP


def _lookup(matrix):
    for s in WEYL_GROUP:
        if np.allclose(s.as_array(), matrix, atol=1e-9):
            return s
    raise ValueError(f"Matrix {matrix.tolist()} is not a Weyl group element")


def weyl_element(word):
    """Return the interned element with the given reduced word."""
    for s in WEYL_GROUP:
        if s.word == word:
            return s
    raise KeyError(f"Unknown Weyl word {word!r}; expected one of {[s.word for s in WEYL_GROUP]}")


def reflect(i, v):
    """
    Simple reflection s_i(v) = v - <v, e_i> e_i.

    Args:
        i (int): 1 or 2.
        v (WeightVector): Weight to reflect.

    Returns:
        WeightVector: The reflected weight.
    """
    root = SIMPLE_ROOTS[i - 1]
    return v - pairing(v, root) * root


def shifted_action(s, alpha, params):
    """Affine action s^(alpha) = Q + s(alpha - Q)."""
    return params.Q + s.apply(alpha - params.Q)


def dominant_representative(alpha, params):
    """
    Find the Weyl element sending alpha - Q into the open negative chamber.

    Args:
        alpha (WeightVector): Weight to reflect.
        params (TodaParams): Provides Q.

    Returns:
        tuple: (WeylElement s, WeightVector s^(alpha)).

    Raises:
        WallDegeneracy: alpha - Q lies on a chamber wall.
    """
    shifted = alpha - params.Q
    tol = WALL_TOLERANCE * (1.0 + shifted.norm())
    for s in WEYL_GROUP:
        image = s.apply(shifted)
        if pairing(image, E1) < -tol and pairing(image, E2) < -tol:
            return s, params.Q + image
    raise WallDegeneracy(f"alpha - Q = {shifted.omega_coords()} (omega basis) lies on a chamber wall")


def in_negative_chamber(alpha, params):
    shifted = alpha - params.Q
    tol = WALL_TOLERANCE * (1.0 + shifted.norm())
    return pairing(shifted, E1) < -tol and pairing(shifted, E2) < -tol


def conformal_weight(alpha, params):
    """Delta_alpha = <alpha/2, Q - alpha/2>."""
    return pairing(alpha / 2.0, params.Q - alpha / 2.0)
