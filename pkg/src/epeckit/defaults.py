"""Shared numeric tolerances and solver defaults."""

# Absolute feasibility tolerance for membership and complementarity residuals.
TAU_FEAS = 1e-8

# Projected-gradient stationarity tolerance.
TAU_STAT = 1e-8

# Terms with |coefficient| at or below this are dropped from polynomials.
COEFF_PRUNE = 1e-15

# Coefficient-wise tolerance for symbolic identity tests (Jacobian symmetry,
# gradient reconstruction, h-part matching).
COEFF_TOL = 1e-12

# Pivot magnitude below this counts as singular in piece classification.
PIVOT_TOL = 1e-10

# Exhaustive 2^p piece enumeration is allowed up to this dimension.
P_MAX = 12

# Multistart seed count per piece and per-start iteration cap.
MULTISTART = 16
MAX_ITERS = 10_000

# Pieces whose best values differ by at most this tie-break deterministically.
TIE_TOL = 1e-9

# Default best-response gap threshold for global-equilibrium certificates.
DEFAULT_EPS = 1e-6

# Extreme-ray enumeration is exact up to this cone dimension; beyond it the
# second-order check samples directions and flags the certificate.
RAY_DIM_MAX = 8
RAY_SAMPLES = 10_000
