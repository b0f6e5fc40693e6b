import os
from dotenv import load_dotenv

load_dotenv()

# ── Needlet frame defaults ────────────────────────────────────────────────────
#
# DEFAULT_B    → dilation factor of the window b(·); level j covers the harmonic
#                degrees B^{j-1} < l < B^{j+1}.
# WINDOW_TABLE_SIZE → samples in the tabulated smooth step the window is read
#                from (linear interpolation between samples).
DEFAULT_B = float(os.getenv("NEEDLET_B", "2.0"))
WINDOW_TABLE_SIZE = int(os.getenv("NEEDLET_WINDOW_TABLE_SIZE", "4096"))

# ── Estimator defaults ────────────────────────────────────────────────────────
#
# DEFAULT_ETA    → block size exponent, ℓ_j = [N_j^η].
# DEFAULT_KAPPA  → threshold constant κ in w = I(|Â| > κ t_n^p).
# DEFAULT_P_STAT → power p of the block statistic, taken on |β|; 2 is the
#   block energy.
# DEFAULT_BLOCK_NORM → "effective" divides a block's sum by its cubature mass
#   counted in mean-weight points, "target" by ℓ_j. The level grids weight
#   polar rings far below equatorial ones, so only "effective" gives every
#   block of a level the same pure-noise mean.
DEFAULT_ETA = float(os.getenv("NEEDLET_ETA", "0.5"))
DEFAULT_KAPPA = float(os.getenv("NEEDLET_KAPPA", "3.0"))
DEFAULT_P_STAT = int(os.getenv("NEEDLET_P_STAT", "2"))
DEFAULT_BLOCK_NORM = os.getenv("NEEDLET_BLOCK_NORM", "effective")

# ── Calibration ───────────────────────────────────────────────────────────────
#
# BENCH_GAMMA → pure-noise exceedance target a bench plan without an explicit
#   κ calibrates to before it runs. Low levels have few degrees of freedom per
#   block and dominate the exceedances, so the target sits well under 1%.
# KAPPA_GRID_SIZE → points of the geometric κ grid on [1e-3, 1e4].
BENCH_GAMMA = float(os.getenv("NEEDLET_BENCH_GAMMA", "0.001"))
KAPPA_GRID_SIZE = int(os.getenv("NEEDLET_KAPPA_GRID_SIZE", "701"))

# ── Resource guard ────────────────────────────────────────────────────────────
#
# Hard cap on the number of points in a single cubature grid. A level-7 grid
# with B = 2 has 256 x 511 = 130816 points and its Legendre table takes about
# 130 MB; the default allows one more level at B = 2 before refusing.
GRID_POINT_CAP = int(os.getenv("NEEDLET_GRID_CAP", "600000"))

# ── Parallelism ───────────────────────────────────────────────────────────────
#
# Worker threads for replication loops. Results are aggregated in replication
# order, so this changes wall time only, never the numbers.
THREADS = int(os.getenv("NEEDLET_THREADS", str(os.cpu_count() or 1)))

# ── Output ────────────────────────────────────────────────────────────────────
REPORTS_DIR = os.getenv("NEEDLET_REPORTS_DIR", "reports")
