# app/constants.py
import math

# Square roots used by the Euclidean embedding of the sl3 Cartan plane
SQRT2 = math.sqrt(2.0)
SQRT3_2 = math.sqrt(1.5)

# Relative tolerance for declaring a weight to sit on a Weyl chamber wall
WALL_TOLERANCE = 1e-12

# Distance to the nearest integer under which a Gamma / l argument is treated as exact
INTEGER_TOLERANCE = 1e-12

# Integer distance under which hypergeometric parameter differences are non-generic
GENERICITY_TOLERANCE = 1e-9

# Upsilon strip quadrature: absolute / relative targets and subdivision limit
UPSILON_EPSABS = 1e-14
UPSILON_EPSREL = 1e-12
UPSILON_QUAD_LIMIT = 400

# Below this t the Upsilon integrand is replaced by its Maclaurin expansion
UPSILON_SERIES_CUTOFF = 1e-3

# Target size of the discarded Upsilon integrand tail
UPSILON_TAIL = 1e-16

# Memoized Upsilon strip integrals
UPSILON_CACHE_SIZE = 65536

# Direct 3F2 series radius, and the matching radius for the series at infinity
SERIES_RADIUS = 0.9
INFINITY_RADIUS = 1.0 / 0.9

# Relative size of the last kept 3F2 term
SERIES_RTOL = 1e-16

# Hard cap on 3F2 series terms
SERIES_MAX_TERMS = 20000

# Analytic continuation of 3F2 past the series disc
CONTINUATION_ANCHOR = 0.5
CONTINUATION_RTOL = 1e-13
CONTINUATION_ATOL = 1e-15

# Cauchy-integral derivatives used by the ODE residual
CAUCHY_RADIUS = 0.05
CAUCHY_NODES = 32

# Far-field cutoff and near-field disc radius of the GMC point sets
FAR_FIELD_RADIUS = 10.0
NEAR_FIELD_RADIUS = 0.5

# Innermost graded radius around the insertions at 0 and 1
INNER_RADIUS = 1e-4

# Point budget per refinement level
POINTS_PER_LEVEL = (1024, 2304, 4096)

# Largest point set handled by the dense Cholesky sampler
MAX_POINTS = 4096

# Largest diagonal jitter added before giving up on the Cholesky factor
CHOLESKY_JITTER = 1e-10

# Gauss-Legendre nodes per cell direction for the deterministic cell weights
CELL_QUADRATURE_NODES = 4

# Samples drawn per MC partition
SAMPLE_BATCH = 256

# Default master seed for MC runs
DEFAULT_SEED = 20240101

# Default MC sample count
DEFAULT_SAMPLES = 20000

# Envelope size at the ends of the extended Liouville c-grid
C_GRID_ENVELOPE = 1e-8

# Points of the extended Liouville c-grid
C_GRID_POINTS = 801

# Fraction of the typical mass used to place the right end of the extended Liouville c-grid
C_GRID_MASS_FLOOR = 1e-2

# Terms of the 0F1 series used for the radial factors at small argument
RADIAL_SERIES_TERMS = 30

# Relative mismatch between discretized and exact reflection coefficients that triggers a warning
REFLECTION_RATIO_TOLERANCE = 0.05

# Epsilons used to extrapolate the DOZZ limit of the Toda formula
DOZZ_LIMIT_EPSILONS = (1e-2, 1e-3, 1e-4)

# Output float format, 17 significant digits
FLOAT_FORMAT = "%.17g"

# CLI exit codes
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_SINGULAR = 2
EXIT_USAGE = 64
EXIT_CONFIG = 65
