"""Numerical tolerances and iteration caps, in one place."""

# linalg
SYMMETRY_TOL = 1e-10
EXPM_NORM_TARGET = 0.5
EXPM_TAYLOR_DEGREE = 14
JACOBI_MAX_SWEEPS = 100
JACOBI_OFFDIAG_TOL = 1e-12
RADICAND_TOL = 1e-12
LSTSQ_RESIDUAL_TOL = 1e-10
NILPOTENT_TOL = 1e-10

# graph
ZETA_TOL = 1e-9
NULLSPACE_REL_TOL = 1e-9
DECOMPOSITION_TOL = 1e-8

# homogeneity
BRACKET_MAX_DOUBLINGS = 60
BISECTION_MAX_STEPS = 200
BISECTION_RESIDUAL_TOL = 1e-12
FD_STEP = 1e-6

# synthesis
EPS_CERT = 1e-8
STRUCTURE_RESIDUAL_TOL = 1e-6
STRUCTURE_COND_MAX = 1e8
PROJECTION_TARGET = 1.0
# accept once every block clears this fraction of the cone shift
PROJECTION_ACCEPT = 0.1
PROJECTION_MAX_ITERS = 20000
PROJECTION_STALL_ITERS = 50
PROJECTION_STALL_TOL = 1e-12
NU_START = 1.0
NU_CAP = 2.0 ** 20
FIXED_RHO_HALVINGS = 30
# cone shift for the Y = -C^T fallback, relative to |C^T C|
FALLBACK_TARGET = 1e-4

# observer
# below this magnitude a homogeneous gain term is returned as exactly zero
SINGULAR_FLOOR = 1e-300

# simulation
DIVERGENCE_NORM = 1e12
DEFAULT_STEP = 1e-3
FIGURE_THRESHOLD = 1e-2
SCALING_THRESHOLD = 1e-6
LYAPUNOV_DECIMATION = 10
