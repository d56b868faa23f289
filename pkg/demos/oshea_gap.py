"""A plant that every constant gain in [0, inf) stabilises, yet no multiplier is found.

G = -s^2/(s^2 + 0.5 s + 1)^2 - 1e-3 keeps its Nyquist curve off the
nonnegative real axis, so the loop is stable for every nonnegative constant
gain.  Growing the kernel basis never lifts the LP optimum above zero.
"""

import math

from zfcert import FrequencyGrid, interval_clearance, oshea_monotone_plant
from zfcert.search import SearchProblem, infeasibility_report
from zfcert.multiplier import KernelBasis

g = oshea_monotone_plant(xi=0.25, eps=1e-3)
grid = FrequencyGrid.default()
print("clearance from [0, inf):", interval_clearance(g, grid, 0.0, math.inf))

prob = SearchProblem(g, basis=KernelBasis.empty(), mode="signed", grid=grid)
for size, margin in infeasibility_report(prob, 40, step=4):
    print(f"basis {size:2d}: best margin {margin:+.3e}")
