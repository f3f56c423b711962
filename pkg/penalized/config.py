from __future__ import annotations

# ============================== solver defaults ==============================

DEFAULT_FOLDS = 10
DEFAULT_PATH_SIZE = 100
PATH_RATIO = 1e-3           # smallest lambda / lambda_max when n > p
PATH_RATIO_WIDE = 1e-2      # same, when n <= p
LAMBDA_FLOOR = 1e-10        # stands in for lambda_max == 0

CD_TOL = 1e-7               # max coefficient change per sweep
CD_MAX_SWEEPS = 100_000

QP_TOL = 1e-10              # max change of the garrote factors per sweep
QP_KKT_SCALE = 1e-6         # KKT tolerance is QP_KKT_SCALE * n
QP_MAX_SWEEPS = 10_000
GARROTE_LAMBDA_FLOOR = 1e-12

SCAD_GAMMA = 3.7
MCP_GAMMA = 3.0
SCAD_GAMMA_LADDER = (2.1, 2.7, 3.7, 5.0, 10.0, 20.0)
MCP_GAMMA_LADDER = (1.5, 2.0, 3.0, 5.0, 10.0, 20.0)

RIDGE_GRID_SIZE = 100
RIDGE_GRID_LOW = 1e-4       # times n
RIDGE_GRID_HIGH = 1e3       # times n

PIVOT_SCALE = 1e-10         # Cholesky pivot below PIVOT_SCALE * n is singular
RSS_FLOOR = 1e-12

# ============================== harness defaults ==============================

DEFAULT_REPLICATIONS = 1000
DEFAULT_SEED = 0
DEFAULT_WORKERS = 1

# order used for every output table
METHODS = (
    "ols", "ridge", "ng-aic", "ng-bic", "ngridge-bic",
    "lasso", "enet", "adalasso", "scad", "mcp",
)
EXTRA_METHODS = ("ngridge-aic",)
METHOD_ALIASES = {"ng-cp": "ng-aic"}

METRICS = ("mse", "me", "ic1", "ic2", "elapsed", "mse_std", "me_std")
LOG_SCALE_METRICS = ("mse", "me", "mse_std", "me_std", "elapsed")
