"""Plants for which constant gains are uniformly stabilised but no multiplier is found.

Both families are built on ``P(s) = s^2 / (s^2 + 2 xi s + 1)^2`` with
``0 < xi <= 0.25``:

* monotone:  ``G = -P - eps``; its Nyquist curve misses ``[0, inf)``;
* slope:     ``G`` chosen so that ``(G - 1/b)/(a G - 1) = xi^2 P / a + eps``
  (``a > 0``), or ``G = 1/b - P - eps`` when ``a = 0``.

The pipeline checks RH-infinity membership, loop stability at ``a``, the
clearance of the Nyquist curve from ``[1/b, 1/a]``, the algebraic identity
above on the grid, and runs the LP ladder over growing kernel bases.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ParameterOutOfRange
from .lti import (
    FrequencyGrid,
    Polynomial,
    RationalTF,
    evaluate,
    in_rh_inf,
    interval_clearance,
    is_hurwitz,
    routh_hurwitz,
)
from .multiplier import KernelBasis, SlopeBand
from .search import SearchProblem, infeasibility_report, loop_characteristic

__all__ = [
    "GAP_VERDICT",
    "oshea_monotone_plant",
    "oshea_slope_plant",
    "slope_identity_residual",
    "run_counterexample",
]

GAP_VERDICT = "uniformly stable over LTI class at grid resolution, yet no finite-basis multiplier found"
NO_GAP_VERDICT = "gap not reproduced"


def _check_common(xi: float, eps: float) -> None:
    if not (0.0 < xi <= 0.25):
        raise ParameterOutOfRange(f"xi must lie in (0, 0.25], got {xi}")
    if not (eps > 0 and math.isfinite(eps)):
        raise ParameterOutOfRange(f"eps must be positive, got {eps}")


def _damped_square(xi: float) -> Polynomial:
    return Polynomial([1.0, 2.0 * xi, 1.0]) ** 2


def oshea_monotone_plant(xi: float = 0.25, eps: float = 1e-3) -> RationalTF:
    _check_common(xi, eps)
    return RationalTF([-1.0, 0.0, 0.0], _damped_square(xi).coeffs) - eps


def oshea_slope_plant(xi: float, eps: float, a: float, b: float) -> RationalTF:
    _check_common(xi, eps)
    if not (0.0 <= a < b < math.inf):
        raise ParameterOutOfRange(f"slope counterexample needs 0 <= a < b < inf, got a={a}, b={b}")
    D2 = _damped_square(xi)
    s2 = Polynomial([1.0, 0.0, 0.0])
    if a == 0.0:
        return RationalTF(-s2, D2.coeffs) + (1.0 / b - eps)
    if a * eps >= 1.0:
        raise ParameterOutOfRange("eps too large: need a*eps < 1")
    num = (1.0 / b - eps) * D2 - (xi**2 / a) * s2
    den = (1.0 - a * eps) * D2 - xi**2 * s2
    return RationalTF(num, den)


def slope_identity_residual(g: RationalTF, xi: float, eps: float, a: float, b: float,
                            grid: FrequencyGrid) -> float:
    """``max |(G - 1/b)(aG - 1)^-1 - (xi^2 s^2 / (a D^2) + eps)|`` over ``s = jw`` on the grid."""
    w = grid.omegas
    s = 1j * w
    gv = np.asarray(evaluate(g, w), dtype=complex)
    lhs = (gv - 1.0 / b) / (a * gv - 1.0)
    D = s**2 + 2.0 * xi * s + 1.0
    rhs = (xi**2 / a) * s**2 / D**2 + eps
    res = np.abs(lhs - rhs)
    if grid.include_infinity:
        g_inf = g.feedthrough()
        # s^2 / D^2 -> 0 as |s| -> inf
        res = np.append(res, abs((g_inf - 1.0 / b) / (a * g_inf - 1.0) - eps))
    return float(np.max(res))


def run_counterexample(
    name: str,
    xi: float = 0.25,
    eps: float = 1e-3,
    a: float = 0.5,
    b: float = 2.0,
    max_basis: int = 40,
    grid: FrequencyGrid | None = None,
) -> dict:
    """Build the named plant and run every check; returns a JSON-ready report."""
    grid = grid or FrequencyGrid.default()
    if name == "oshea-monotone":
        g = oshea_monotone_plant(xi, eps)
        band = SlopeBand()
        params = {"xi": xi, "eps": eps}
    elif name == "oshea-slope":
        g = oshea_slope_plant(xi, eps, a, b)
        band = SlopeBand(a, b)
        params = {"xi": xi, "eps": eps, "a": a, "b": b}
    else:
        raise ValueError(f"unknown counterexample {name!r}")

    lo = band.binv
    hi = math.inf if band.a == 0 else 1.0 / band.a
    rh = in_rh_inf(g)
    report: dict = {
        "name": name,
        "params": params,
        "plant": g.to_dict(),
        "in_rh_inf": rh,
        "den_hurwitz_routh": routh_hurwitz(g.den),
        "interval": [lo, "inf" if math.isinf(hi) else hi],
    }
    if band.a > 0:
        loop = loop_characteristic(g, band.a)
        report["loop_hurwitz"] = is_hurwitz(loop)
        report["loop_hurwitz_routh"] = routh_hurwitz(loop)
        report["identity_residual"] = slope_identity_residual(g, xi, eps, band.a, band.b, grid)
    if not rh:
        report["verdict"] = NO_GAP_VERDICT
        return report
    clearance = interval_clearance(g, grid, lo, hi)
    report["clearance"] = clearance

    prob = SearchProblem(g, band=band, basis=KernelBasis.empty(), mode="signed", grid=grid)
    ladder = infeasibility_report(prob, max_basis)
    report["ladder"] = [{"basis_size": k, "optimal_margin": m} for k, m in ladder]
    report["ladder_max"] = max(m for _, m in ladder)
    gap = clearance > 0 and all(m <= 0 for _, m in ladder)
    report["verdict"] = GAP_VERDICT if gap else NO_GAP_VERDICT
    report["caveat"] = ("LP infeasibility over a finite kernel basis is empirical evidence; "
                        "nonexistence of a multiplier is not proved here")
    return report
