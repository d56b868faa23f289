"""Multiplier synthesis by linear programming, re-verification and gain bounds.

For a plant ``G`` and slope band ``[a, b]`` the condition to certify is

    Re{ (1 - Z(jw)) K(jw) } >= eps   for all w,   K = (G - 1/b)(a G^* - 1),

which is affine in the kernel coefficients.  Sampling it on a frequency grid
and adding the L1 budget ``sum(cpos + cneg) <= 1`` gives an LP in
``(cpos, cneg, eps)`` whose optimum is the best margin the basis can reach.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NonpositiveMargin, PreconditionViolation, SolverFailure
from .lti import (
    FrequencyGrid,
    Polynomial,
    RationalTF,
    evaluate,
    hinf_norm_estimate,
    is_hurwitz,
    rh_inf_violation,
)
from .multiplier import (
    BUDGET_TOL,
    KernelBasis,
    MultiplierCandidate,
    PiMatrix,
    SlopeBand,
    condition_values,
    l1_budget,
    loop_kernel,
    z_transform_value,
)
from .simplex import simplex_max

__all__ = [
    "FEASIBLE",
    "INFEASIBLE_AT_BASIS",
    "VERIFICATION_FAILED",
    "VERIFY_REFINEMENT",
    "SearchProblem",
    "Certificate",
    "loop_characteristic",
    "synthesize",
    "verify",
    "gain_bound",
    "infeasibility_report",
    "constraint_table",
]

FEASIBLE = "Feasible"
INFEASIBLE_AT_BASIS = "InfeasibleAtBasis"
VERIFICATION_FAILED = "VerificationFailed"

VERIFY_REFINEMENT = 10
LOCAL_REFINEMENT_POINTS = 201


def loop_characteristic(plant: RationalTF, a: float) -> Polynomial:
    """Closed-loop characteristic polynomial of ``[G, a]``.

    Positive-feedback convention: the loop with constant gain ``a`` is
    ``den - a * num``, so instability corresponds to ``G(jw)`` reaching
    ``1/a`` on the positive real axis.
    """
    return plant.den - a * plant.num


def _contains(fine: FrequencyGrid, coarse: FrequencyGrid) -> bool:
    if coarse.include_infinity and not fine.include_infinity:
        return False
    w, f = coarse.omegas, fine.omegas
    if w.size == 0:
        return True
    if f.size == 0:
        return False
    idx = np.clip(np.searchsorted(f, w), 0, f.size - 1)
    near = np.minimum(np.abs(f[idx] - w), np.abs(f[np.maximum(idx - 1, 0)] - w))
    return bool(np.all(near <= 1e-9 * np.maximum(1.0, w)))


@dataclass(frozen=True, eq=False)
class SearchProblem:
    plant: RationalTF
    band: SlopeBand = field(default_factory=SlopeBand)
    basis: KernelBasis = field(default_factory=KernelBasis.default)
    mode: str = "nonneg"
    grid: FrequencyGrid = field(default_factory=FrequencyGrid.default)
    verify_grid: Optional[FrequencyGrid] = None

    def __post_init__(self):
        if self.mode not in ("nonneg", "signed"):
            raise ValueError(f"mode must be 'nonneg' or 'signed', got {self.mode!r}")
        why = rh_inf_violation(self.plant)
        if why is not None:
            raise PreconditionViolation(f"plant not in RH-infinity: {why}")
        if self.band.a > 0 and not is_hurwitz(loop_characteristic(self.plant, self.band.a)):
            raise PreconditionViolation(
                f"loop [G, a] with a={self.band.a:g} is unstable (den - a*num is not Hurwitz)"
            )
        if self.verify_grid is None:
            object.__setattr__(self, "verify_grid", self.grid.refine(VERIFY_REFINEMENT))
        elif not _contains(self.verify_grid, self.grid):
            raise ValueError("verify_grid must contain every point of the search grid")

    def with_basis(self, basis: KernelBasis) -> "SearchProblem":
        return dataclasses.replace(self, basis=basis)


@dataclass(frozen=True, eq=False)
class Certificate:
    status: str
    plant: RationalTF
    band: SlopeBand
    epsilon: float
    candidate: Optional[MultiplierCandidate] = None
    verified_epsilon: Optional[float] = None
    gain_bound: Optional[float] = None
    provenance: dict = field(default_factory=dict)
    caveats: tuple = ()

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "plant": self.plant.to_dict(),
            "band": self.band.to_dict(),
            "epsilon": self.epsilon,
            "verified_epsilon": self.verified_epsilon,
            "gain_bound": self.gain_bound,
            "candidate": None if self.candidate is None else self.candidate.to_dict(),
            "provenance": self.provenance,
            "caveats": list(self.caveats),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        cand = d.get("candidate")
        return cls(
            status=d["status"],
            plant=RationalTF(d["plant"]["num"], d["plant"]["den"]),
            band=SlopeBand.from_dict(d["band"]),
            epsilon=d["epsilon"],
            candidate=None if cand is None else MultiplierCandidate.from_dict(cand),
            verified_epsilon=d.get("verified_epsilon"),
            gain_bound=d.get("gain_bound"),
            provenance=d.get("provenance", {}),
            caveats=tuple(d.get("caveats", ())),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Certificate":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Certificate):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def _caveats(prob: SearchProblem) -> tuple:
    out = [
        f"multiplier search restricted to a finite basis of {len(prob.basis)} exponential kernels; "
        "a nonpositive optimum is evidence, not proof, that no Zames-Falb multiplier exists",
        "frequency condition checked on a finite grid plus the omega -> inf limit, "
        "then re-checked on a refined grid",
        "basis completeness in L1 is not established at finite truncation",
    ]
    if prob.mode == "signed":
        out.append(
            "signed mode bounds ||z||_1 by sum(cpos + cneg) (triangle inequality), "
            "which is conservative"
        )
    return tuple(out)


def _lp_rows(prob: SearchProblem, grid: FrequencyGrid) -> tuple[np.ndarray, np.ndarray]:
    """Constant part ``Re K`` and coefficient matrix ``Re{Z_k K}`` per grid point."""
    w = grid.omegas
    k_vals = loop_kernel(evaluate(prob.plant, w), prob.band) if w.size else np.zeros(0, complex)
    R = (prob.basis.transforms(w) * k_vals[:, None]).real
    r0 = k_vals.real
    if grid.include_infinity:
        k_inf = loop_kernel(np.array([prob.plant.feedthrough()]), prob.band)[0]
        r0 = np.append(r0, k_inf.real)
        R = np.vstack((R, np.zeros((1, len(prob.basis)))))
    return r0, R


def _solve_lp(prob: SearchProblem, rows=None) -> tuple[MultiplierCandidate, float, int]:
    r0, R = rows if rows is not None else _lp_rows(prob, prob.grid)
    if r0.size == 0:
        raise SolverFailure("no constraint rows (empty grid)")
    n = len(prob.basis)
    signed = prob.mode == "signed"
    cols = [R, -R] if signed else [R]
    nv = n * (2 if signed else 1)
    # eps = e - shift with e >= 0 keeps the origin feasible
    shift = max(0.0, -float(np.min(r0))) + 1.0
    A = np.hstack(cols + [np.ones((r0.size, 1))])
    b = r0 + shift
    budget = np.concatenate((np.ones(nv), [0.0]))
    A = np.vstack((A, budget))
    b = np.append(b, 1.0)
    c = np.zeros(nv + 1)
    c[-1] = 1.0
    res = simplex_max(c, A, b)
    if res.status != "optimal":
        raise SolverFailure(f"LP returned status {res.status}")
    x = np.maximum(res.x[:nv], 0.0)
    cpos = x[:n]
    cneg = x[n:] if signed else np.zeros(n)
    total = float(cpos.sum() + cneg.sum())
    if total > 1.0:
        cpos, cneg = cpos / total, cneg / total
    cand = MultiplierCandidate(prob.basis, cpos, cneg, prob.mode)
    eps = float(np.min(r0 - R @ cand.weights))
    return cand, eps, res.iterations


def synthesize(prob: SearchProblem, verify_result: bool = True) -> Certificate:
    """Maximise the margin over the basis and, if positive, re-verify it."""
    cand, eps, iters = _solve_lp(prob)
    inf_margin = None
    if prob.grid.include_infinity:
        k_inf = loop_kernel(np.array([prob.plant.feedthrough()]), prob.band)[0]
        inf_margin = float(k_inf.real)
    provenance = {
        "search_grid": prob.grid.describe(),
        "verify_grid": prob.verify_grid.describe(),
        "basis": prob.basis.describe(),
        "mode": prob.mode,
        "solver": "dense tableau simplex, Bland's rule",
        "solver_iterations": iters,
        "l1_budget": l1_budget(cand),
        "margin_at_infinity": inf_margin,
        "timestamp": None,
    }
    if eps <= 0:
        return Certificate(
            status=INFEASIBLE_AT_BASIS,
            plant=prob.plant,
            band=prob.band,
            epsilon=eps,
            candidate=None,
            provenance=provenance,
            caveats=_caveats(prob),
        )
    cert = Certificate(
        status=FEASIBLE,
        plant=prob.plant,
        band=prob.band,
        epsilon=eps,
        candidate=cand,
        provenance=provenance,
        caveats=_caveats(prob),
    )
    if not verify_result:
        return cert
    cert = verify(cert, prob)
    if cert.feasible:
        bound = gain_bound(cert.verified_epsilon, prob.plant, cand, band=prob.band, grid=prob.verify_grid)
        cert = dataclasses.replace(cert, gain_bound=bound)
    return cert


def _local_min(g, cand, band, w: np.ndarray, k: int) -> tuple[float, float]:
    lo = w[max(k - 1, 0)]
    hi = w[min(k + 1, w.size - 1)]
    if hi <= lo:
        return math.inf, float(w[k])
    pts = np.linspace(lo, hi, LOCAL_REFINEMENT_POINTS)
    vals = condition_values(g, cand, band, FrequencyGrid(pts, include_infinity=False))
    j = int(np.argmin(vals))
    return float(vals[j]), float(pts[j])


def verify(cert: Certificate, prob: SearchProblem) -> Certificate:
    """Recompute the margin on the dense grid plus a local refinement around its minimiser.

    The certificate is downgraded to ``VerificationFailed`` if the verified
    margin falls below half the LP margin.
    """
    if cert.status != FEASIBLE or cert.candidate is None:
        raise ValueError("only Feasible certificates can be verified")
    cand = cert.candidate
    if l1_budget(cand) > 1.0 + BUDGET_TOL:
        raise ValueError("candidate violates the L1 budget")
    grid = prob.verify_grid
    vals = condition_values(prob.plant, cand, prob.band, grid)
    k = int(np.argmin(vals))
    verified = float(vals[k])
    where = "inf" if k >= grid.omegas.size else float(grid.omegas[k])
    if k < grid.omegas.size:
        local, w_local = _local_min(prob.plant, cand, prob.band, grid.omegas, k)
        if local < verified:
            verified, where = local, w_local
    prov = dict(cert.provenance)
    prov["verified_argmin_omega"] = where
    status = FEASIBLE if verified >= cert.epsilon / 2 else VERIFICATION_FAILED
    return dataclasses.replace(cert, status=status, verified_epsilon=verified, provenance=prov)


def gain_bound(
    epsilon: float,
    plant: RationalTF,
    cand: MultiplierCandidate,
    band: SlopeBand | None = None,
    grid: FrequencyGrid | None = None,
) -> float:
    """Uniform bound on the closed-loop gain implied by a margin ``epsilon``.

    Follows the graph-separation argument step by step:

    * on the graph of ``G``: ``<v1, Pi v1> <= -eps_hat ||v1||^2`` with
      ``eps_hat = 2 eps / (1 + ||G||_inf^2)`` (the frequency condition gives
      ``-2 eps`` per unit input, and ``||v1||^2 <= (1 + ||G||^2) ||u||^2``);
    * ``eps_hat/2 ||v1||^2 <= (||Pi|| + 2||Pi||^2/eps_hat) ||v2 - v1||^2``,
      i.e. ``||v1||^2 <= C ||v2 - v1||^2`` with
      ``C = 2 (||Pi|| + 2 ||Pi||^2 / eps_hat) / eps_hat``;
    * ``||v2||^2 <= 2||v2 - v1||^2 + 2||v1||^2`` so
      ``||v1||^2 + ||v2||^2 <= (3C + 2) ||v2 - v1||^2``;
    * ``gamma = 1 / (3C + 2)`` and the gain is at most ``1 / sqrt(gamma)``.
    """
    if not epsilon > 0:
        raise NonpositiveMargin(f"gain bound needs a positive margin, got {epsilon}")
    grid = grid or FrequencyGrid.default()
    g_norm = hinf_norm_estimate(plant, grid)
    eps_hat = 2.0 * epsilon / (1.0 + g_norm**2)
    pi = PiMatrix(cand, None if band is None or band.is_monotone else band)
    pi_norm = pi.norm_sup(grid)
    C = 2.0 * (pi_norm + 2.0 * pi_norm**2 / eps_hat) / eps_hat
    gamma = 1.0 / (3.0 * C + 2.0)
    return 1.0 / math.sqrt(gamma)


def infeasibility_report(prob: SearchProblem, max_basis: int, step: int = 2) -> list[tuple[int, float]]:
    """LP optima for nested bases of size ``0, step, ..., max_basis``.

    Bases are prefixes of one farthest-point ordered family, so the optimum
    is nondecreasing in the basis size (up to solver round-off).
    """
    family = KernelBasis.nested(max_basis)
    base = prob.with_basis(family)
    r0, R_full = _lp_rows(base, prob.grid)
    out = []
    for k in range(0, max_basis + 1, step):
        sub = prob.with_basis(family.prefix(k))
        _, eps, _ = _solve_lp(sub, rows=(r0, R_full[:, :k]))
        out.append((k, eps))
    return out


def constraint_table(prob: SearchProblem, cand: MultiplierCandidate, grid: FrequencyGrid | None = None) -> str:
    """CSV text with one row per frequency: omega, G, M = 1 - Z and the condition value."""
    grid = grid or prob.grid
    g = np.asarray(evaluate(prob.plant, grid.omegas), dtype=complex)
    m = 1.0 - np.asarray(z_transform_value(cand, grid.omegas), dtype=complex)
    if grid.include_infinity:
        g = np.append(g, prob.plant.feedthrough())
        m = np.append(m, 1.0)
    cond = condition_values(prob.plant, cand, prob.band, grid)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["omega", "re_G", "im_G", "re_M", "im_M", "condition"])
    for lab, gi, mi, ci in zip(grid.labels(), g, m, cond):
        writer.writerow([repr(lab) if isinstance(lab, float) else lab,
                         repr(float(gi.real)), repr(float(gi.imag)),
                         repr(float(mi.real)), repr(float(mi.imag)), repr(float(ci))])
    return buf.getvalue()
