"""Every default used by the command-line tools, in one place.

Each value can be overridden by the matching long flag.  The grid size also
falls back to the ``ZF_CERTIFY_GRID_POINTS`` environment variable when the
flag is absent.
"""

import os

from .classes import DEFAULT_DT
from .lti import DEFAULT_GRID_POINTS, DEFAULT_OMEGA_RANGE, HURWITZ_TOL
from .multiplier import DEFAULT_N_RATES, DEFAULT_RATE_RANGE
from .search import VERIFY_REFINEMENT

GRID_POINTS_ENV = "ZF_CERTIFY_GRID_POINTS"

# frequency grid: log-spaced points on OMEGA_RANGE, plus omega = 0 and omega -> inf
GRID_POINTS = DEFAULT_GRID_POINTS
OMEGA_RANGE = DEFAULT_OMEGA_RANGE
VERIFY_FACTOR = VERIFY_REFINEMENT

# kernel basis: mirrored exponential pairs, rates log-spaced on RATE_RANGE
BASIS_SIZE = 2 * DEFAULT_N_RATES
RATE_RANGE = DEFAULT_RATE_RANGE
MODE = "nonneg"

# counterexample ladder
LADDER_MAX_BASIS = 40
XI = 0.25
EPS = 1e-3

# class tests
BLOCKS_L = 50
TAU_SAMPLES = 64
TRIALS = 20
SEED = 0
TRACE_DT = DEFAULT_DT

ROOT_TOL = HURWITZ_TOL


def grid_points(flag_value: int | None) -> int:
    if flag_value is not None:
        return int(flag_value)
    env = os.environ.get(GRID_POINTS_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"{GRID_POINTS_ENV} must be an integer, got {env!r}") from None
    return GRID_POINTS
