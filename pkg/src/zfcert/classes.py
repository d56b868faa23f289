"""Representatives of the uncertainty classes and empirical membership tests.

Static nonlinearities are continuous piecewise-linear maps with finite end
slopes, so every slope condition reduces to a finite check over segments.
Signals are uniformly sampled traces on ``[0, T]``; between samples they are
interpolated linearly and they vanish outside the sampled window.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.signal import lfilter

from .errors import LengthMismatch, NoDecreasingPair, PreconditionViolation
from .lti import FrequencyGrid, RationalTF, evaluate, in_rh_inf
from .multiplier import CAUSAL, KernelBasis, MultiplierCandidate, SlopeBand

__all__ = [
    "DEFAULT_DT",
    "StaticNonlinearity",
    "SignalTrace",
    "LtiUncertainty",
    "ClassReport",
    "BlockWitness",
    "apply",
    "apply_kernel",
    "iqc_inner_product",
    "membership_test_static",
    "falsify_nonmonotone",
    "falsify_noneven_odd",
    "lti_membership_test",
    "homotopy_sweep",
    "loop_transform",
    "transformed_relation_is_monotone",
    "random_candidate",
    "nonlinearity_from_dict",
    "load_nonlinearity",
]

DEFAULT_DT = 1e-2
BLOCK_LENGTH = 1.0
LTI_CONSTANT_TOL = 1e-9
ODD_TOL = 1e-12
SLOPE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SignalTrace:
    dt: float
    samples: np.ndarray

    def __init__(self, dt: float, samples: Sequence[float]):
        dt = float(dt)
        if not dt > 0:
            raise ValueError("dt must be positive")
        arr = np.asarray(samples, dtype=float).ravel().copy()
        if not np.all(np.isfinite(arr)):
            raise ValueError("trace samples must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "samples", arr)

    @classmethod
    def blocks(cls, levels: Sequence[float], dt: float = DEFAULT_DT, block: float = BLOCK_LENGTH,
               tail_blocks: int = 1) -> "SignalTrace":
        """Piecewise-constant signal, one level per block, followed by zero blocks."""
        per = int(round(block / dt))
        levels = list(levels) + [0.0] * tail_blocks
        return cls(dt, np.repeat(np.asarray(levels, dtype=float), per))

    @property
    def horizon(self) -> float:
        return self.dt * self.samples.size

    def __len__(self) -> int:
        return self.samples.size

    def norm(self) -> float:
        return math.sqrt(self.dt * float(self.samples @ self.samples))

    def inner(self, other: "SignalTrace") -> float:
        _check_compatible(self, other)
        return self.dt * float(self.samples @ other.samples)

    def shifted(self, steps: int) -> "SignalTrace":
        """``t -> x(t + steps*dt)``, zero-filled past the end of the window."""
        out = np.zeros_like(self.samples)
        if steps >= 0:
            out[: max(self.samples.size - steps, 0)] = self.samples[steps:]
        else:
            out[-steps:] = self.samples[: self.samples.size + steps]
        return SignalTrace(self.dt, out)


def _check_compatible(x: SignalTrace, y: SignalTrace) -> None:
    if x.dt != y.dt or len(x) != len(y):
        raise LengthMismatch(f"traces differ: dt {x.dt} vs {y.dt}, length {len(x)} vs {len(y)}")


@dataclass(frozen=True, eq=False)
class StaticNonlinearity:
    """Continuous piecewise-linear map through ``(breakpoints[i], values[i])``.

    Outside the breakpoint range the map continues with ``left_slope`` and
    ``right_slope`` (by default the slopes of the outermost segments).  The
    map must send 0 to 0.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    left_slope: float
    right_slope: float

    def __init__(self, breakpoints, values, left_slope: float | None = None,
                 right_slope: float | None = None, claims_monotone: bool | None = None,
                 claims_odd: bool | None = None):
        bp = np.asarray(breakpoints, dtype=float).ravel().copy()
        val = np.asarray(values, dtype=float).ravel().copy()
        if bp.size == 0 or bp.size != val.size:
            raise ValueError("need equally many (at least one) breakpoints and values")
        if bp.size > 1 and np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if not (np.all(np.isfinite(bp)) and np.all(np.isfinite(val))):
            raise ValueError("breakpoints and values must be finite")
        inner = np.diff(val) / np.diff(bp) if bp.size > 1 else np.zeros(0)
        if left_slope is None:
            left_slope = float(inner[0]) if inner.size else 0.0
        if right_slope is None:
            right_slope = float(inner[-1]) if inner.size else 0.0
        if not (math.isfinite(left_slope) and math.isfinite(right_slope)):
            raise ValueError("end slopes must be finite (bounded operator)")
        bp.setflags(write=False)
        val.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", val)
        object.__setattr__(self, "left_slope", float(left_slope))
        object.__setattr__(self, "right_slope", float(right_slope))
        scale = max(1.0, float(np.max(np.abs(val))))
        if abs(self(0.0)) > 1e-12 * scale:
            raise ValueError(f"nonlinearity must map 0 to 0, got {self(0.0):g}")
        if claims_monotone is not None and claims_monotone != self.is_monotone:
            raise ValueError("claims_monotone is inconsistent with the data")
        if claims_odd is not None and claims_odd != self.is_odd():
            raise ValueError("claims_odd is inconsistent with the data")

    @classmethod
    def linear(cls, k: float) -> "StaticNonlinearity":
        return cls([0.0], [0.0], k, k)

    @classmethod
    def identity(cls) -> "StaticNonlinearity":
        return cls.linear(1.0)

    @classmethod
    def saturation(cls, level: float = 1.0) -> "StaticNonlinearity":
        return cls([-level, level], [-level, level], 0.0, 0.0)

    @classmethod
    def deadzone(cls, width: float = 1.0, slope: float = 1.0) -> "StaticNonlinearity":
        return cls([-width, width], [0.0, 0.0], slope, slope)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        bp, val = self.breakpoints, self.values
        y = np.interp(x, bp, val)
        y = np.where(x < bp[0], val[0] + self.left_slope * (x - bp[0]), y)
        y = np.where(x > bp[-1], val[-1] + self.right_slope * (x - bp[-1]), y)
        return float(y) if y.ndim == 0 else y

    def slopes(self) -> np.ndarray:
        """End slope, interior segment slopes, end slope, in left-to-right order."""
        inner = np.diff(self.values) / np.diff(self.breakpoints) if self.breakpoints.size > 1 else []
        return np.concatenate(([self.left_slope], inner, [self.right_slope]))

    @property
    def slope_range(self) -> tuple[float, float]:
        s = self.slopes()
        return float(s.min()), float(s.max())

    @property
    def is_monotone(self) -> bool:
        return bool(np.all(self.slopes() >= 0))

    def is_odd(self, tol: float = ODD_TOL) -> bool:
        # piecewise-linear maps are continuous, so checking at mirrored breakpoints suffices
        pts = np.concatenate((self.breakpoints, -self.breakpoints))
        scale = max(1.0, float(np.max(np.abs(self.values))))
        return bool(
            np.all(np.abs(self(pts) + self(-pts)) <= tol * scale)
            and abs(self.left_slope - self.right_slope) <= tol * max(1.0, abs(self.left_slope))
        )

    def blend(self, theta: float, a: float) -> "StaticNonlinearity":
        """``theta * Delta + (1 - theta) * a * identity``."""
        return StaticNonlinearity(
            self.breakpoints,
            theta * self.values + (1.0 - theta) * a * self.breakpoints,
            theta * self.left_slope + (1.0 - theta) * a,
            theta * self.right_slope + (1.0 - theta) * a,
        )

    def to_dict(self) -> dict:
        return {
            "breakpoints": [float(v) for v in self.breakpoints],
            "values": [float(v) for v in self.values],
            "left_slope": self.left_slope,
            "right_slope": self.right_slope,
        }


def nonlinearity_from_dict(d: dict) -> StaticNonlinearity:
    if not isinstance(d, dict) or "breakpoints" not in d or "values" not in d:
        raise ValueError('nonlinearity must be a JSON object with "breakpoints" and "values"')
    return StaticNonlinearity(d["breakpoints"], d["values"], d.get("left_slope"), d.get("right_slope"))


def load_nonlinearity(path) -> StaticNonlinearity:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed nonlinearity JSON in {path}: {exc}") from None
    return nonlinearity_from_dict(data)


@dataclass(frozen=True)
class LtiUncertainty:
    tf: RationalTF

    def __post_init__(self):
        if not in_rh_inf(self.tf):
            raise PreconditionViolation("LTI uncertainty must be in RH-infinity")


@dataclass
class ClassReport:
    """Outcome of a class-membership or falsification test."""

    test: str
    member: bool
    margin: float
    witness: Optional[dict] = None
    details: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "member" if self.member else "non-member"

    def to_dict(self) -> dict:
        return {
            "test": self.test,
            "verdict": self.verdict,
            "member": self.member,
            "margin": self.margin,
            "witness": self.witness,
            "details": self.details,
        }


def apply(nl: StaticNonlinearity, x: SignalTrace) -> SignalTrace:
    return SignalTrace(x.dt, nl(x.samples))


def _exp_filter(q: np.ndarray, lam: float, dt: float) -> np.ndarray:
    """Causal ``lam * exp(-lam t)`` convolution of the linear interpolant of ``q``.

    Exact for piecewise-linear input: each step integrates the kernel
    against the linear segment between consecutive samples.
    """
    h = lam * dt
    E = math.exp(-h)
    # (1 - E)/h computed stably for small h
    g = -math.expm1(-h) / h if h > 1e-12 else 1.0 - h / 2.0
    beta = 1.0 - g
    alpha = g - E
    return lfilter([beta, alpha], [1.0, -E], q)


def apply_kernel(q: SignalTrace, cand: MultiplierCandidate) -> SignalTrace:
    """``Z q`` for the candidate's exponential kernel, causal and anticausal passes."""
    out = np.zeros(len(q))
    for side, lam, w in zip(cand.basis.sides, cand.basis.rates, cand.weights):
        if w == 0.0:
            continue
        if side == CAUSAL:
            out += w * _exp_filter(q.samples, lam, q.dt)
        else:
            out += w * _exp_filter(q.samples[::-1], lam, q.dt)[::-1]
    return SignalTrace(q.dt, out)


def iqc_inner_product(x: SignalTrace, y: SignalTrace, cand: MultiplierCandidate,
                      band: SlopeBand | None = None) -> float:
    """``<x - y/b, (1 - Z)(-a x + y)>`` on the sampled window.

    For the monotone band this is ``<x, (1 - Z) y>``.  The inner product is
    the rectangle rule ``dt * sum``, which equals the trapezoidal rule for
    traces that vanish at both ends.
    """
    _check_compatible(x, y)
    band = band or SlopeBand()
    xbar = SignalTrace(x.dt, x.samples - band.binv * y.samples)
    ybar = SignalTrace(x.dt, -band.a * x.samples + y.samples)
    zy = apply_kernel(ybar, cand)
    return xbar.dt * float(xbar.samples @ (ybar.samples - zy.samples))


def random_candidate(rng: np.random.Generator, basis: KernelBasis | None = None,
                     mode: str = "nonneg", budget: float | None = None) -> MultiplierCandidate:
    """Random sparse candidate with L1 budget ``budget`` (uniform in [0, 1] if omitted)."""
    basis = basis or KernelBasis.default()
    n = len(basis)
    budget = float(rng.uniform(0.0, 1.0)) if budget is None else budget
    w = rng.exponential(size=n) * (rng.uniform(size=n) < 0.5)
    if w.sum() == 0 and n:
        w[int(rng.integers(n))] = 1.0
    w = budget * w / w.sum() if n else w
    if mode == "signed":
        neg = rng.uniform(size=n) < 0.5
        return MultiplierCandidate(basis, np.where(neg, 0.0, w), np.where(neg, w, 0.0), "signed")
    return MultiplierCandidate(basis, w, None, "nonneg")


def _random_trace(rng: np.random.Generator, n: int, dt: float, amplitude: float) -> SignalTrace:
    raw = rng.normal(size=n)
    k = max(1, int(rng.integers(1, 30)))
    smooth = np.convolve(raw, np.ones(k) / k, mode="same")
    smooth[0] = smooth[-1] = 0.0
    peak = float(np.max(np.abs(smooth))) or 1.0
    return SignalTrace(dt, amplitude * smooth / peak)


def membership_test_static(nl: StaticNonlinearity, band: SlopeBand, trials: int = 20,
                           seed: int = 0) -> ClassReport:
    """Exact slope check over all segments plus randomised IQC spot checks.

    For a piecewise-linear map every difference quotient is a convex
    combination of segment slopes, so the segment check decides membership.
    The spot checks evaluate the time-domain IQC with random nonnegative
    kernels; they are reported but do not change the verdict.
    """
    slopes = nl.slopes()
    lower = slopes - band.a
    upper = band.b - slopes
    per_seg = np.minimum(lower, upper)
    k = int(np.argmin(per_seg))
    margin = float(per_seg[k])
    # slopes formed by blending land on a or b only up to round-off
    finite_b = band.b if math.isfinite(band.b) else 0.0
    member = margin >= -SLOPE_TOL * max(1.0, band.a, finite_b, float(np.max(np.abs(slopes))))
    witness = None
    if not member:
        n_seg = slopes.size
        witness = {
            "segment": k,
            "slope": float(slopes[k]),
            "side": "below a" if lower[k] < 0 else "above b",
            "location": "left end" if k == 0 else ("right end" if k == n_seg - 1 else "interior"),
        }
    span = max(1.0, 2.0 * float(np.max(np.abs(nl.breakpoints))))
    worst = math.inf
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        x = _random_trace(rng, 400, DEFAULT_DT, span * rng.uniform(0.5, 1.5))
        y = apply(nl, x)
        cand = random_candidate(rng, mode="signed" if nl.is_odd() else "nonneg")
        val = iqc_inner_product(x, y, cand, band)
        xbar = SignalTrace(x.dt, x.samples - band.binv * y.samples)
        ybar = SignalTrace(x.dt, -band.a * x.samples + y.samples)
        scale = xbar.norm() * ybar.norm()
        worst = min(worst, val / scale if scale > 0 else 0.0)
    return ClassReport(
        test="static_slope",
        member=member,
        margin=margin,
        witness=witness,
        details={
            "band": band.to_dict(),
            "slope_range": list(nl.slope_range),
            "trials": trials,
            "seed": seed,
            "worst_normalized_iqc": None if trials == 0 else worst,
        },
    )


@dataclass(frozen=True, eq=False)
class BlockWitness:
    """Alternating-block signal and the two integrals it compares."""

    trace: SignalTrace
    shifted: float
    unshifted: float
    x1: float
    x2: float
    L: int
    min_L: int
    construction: str = "x1/x2"

    @property
    def excess(self) -> float:
        return self.shifted - self.unshifted

    def __iter__(self):
        return iter((self.trace, self.shifted, self.unshifted))


def _block_levels(first: float, second: float, L: int) -> list[float]:
    return [first, second] * (L + 1)


def _shift_integrals(nl: StaticNonlinearity, x: SignalTrace, block: float = BLOCK_LENGTH) -> tuple[float, float]:
    """``int x(t) Delta(x(t + block)) dt`` and ``int x(t) Delta(x(t)) dt``."""
    steps = int(round(block / x.dt))
    y = nl(x.samples)
    y_ahead = nl(x.shifted(steps).samples)
    return x.dt * float(x.samples @ y_ahead), x.dt * float(x.samples @ y)


def _decreasing_pairs(nl: StaticNonlinearity) -> list[tuple[float, float]]:
    """All breakpoint pairs ``x1 < x2`` with ``Delta(x1) > Delta(x2)``, plus points on decreasing tails."""
    bp = [float(v) for v in nl.breakpoints]
    pts = list(bp)
    s = nl.slopes()
    for reach in (1.0, 10.0, 100.0):
        if s[0] < 0:
            pts.append(bp[0] - reach * max(1.0, abs(bp[0])))
        if s[-1] < 0:
            pts.append(bp[-1] + reach * max(1.0, abs(bp[-1])))
    pts = sorted(set(pts))
    vals = [float(nl(p)) for p in pts]
    return [(pts[i], pts[j]) for i in range(len(pts)) for j in range(i + 1, len(pts)) if vals[i] > vals[j]]


def _threshold(nl: StaticNonlinearity, x1: float, x2: float, order: str) -> int:
    """Smallest ``L`` with positive excess; the boundary term depends on which level comes first."""
    d1, d2 = nl(x1), nl(x2)
    D = (x2 - x1) * (d1 - d2)
    q = (x2 * d1 if order == "x1/x2" else x1 * d2) / D
    return 0 if q < 1.0 else int(math.floor(q))


def _min_blocks(nl: StaticNonlinearity, x1: float, x2: float) -> tuple[int, str]:
    return min((_threshold(nl, x1, x2, o), o) for o in ("x1/x2", "x2/x1"))


def falsify_nonmonotone(nl: StaticNonlinearity, L: int, x1: float | None = None,
                        x2: float | None = None, dt: float = DEFAULT_DT) -> BlockWitness:
    """Alternating ``x1, x2`` blocks showing that shifting by one block increases the correlation.

    With ``x1 < x2`` and ``Delta(x1) > Delta(x2)`` the shifted integral
    exceeds the unshifted one by ``(L + 1) D - x2 Delta(x1)`` where
    ``D = (x2 - x1)(Delta(x1) - Delta(x2)) > 0`` (or by ``(L + 1) D -
    x1 Delta(x2)`` when the ``x2`` block comes first), so it is positive once
    ``L >= min_L``.  The pair and block order with the smallest threshold
    are used unless a pair is given; ties go to the smallest amplitude.
    """
    if x1 is None or x2 is None:
        pairs = _decreasing_pairs(nl)
        if not pairs:
            raise NoDecreasingPair("nonlinearity is monotone nondecreasing")
        x1, x2 = min(pairs, key=lambda p: (_min_blocks(nl, *p)[0], max(abs(p[0]), abs(p[1])), p))
    if not (x1 < x2 and nl(x1) > nl(x2)):
        raise NoDecreasingPair(f"({x1:g}, {x2:g}) is not a decreasing pair")
    min_L, order = _min_blocks(nl, x1, x2)
    first, second = (x1, x2) if order == "x1/x2" else (x2, x1)
    trace = SignalTrace.blocks(_block_levels(first, second, L), dt=dt)
    shifted, unshifted = _shift_integrals(nl, trace)
    return BlockWitness(trace, shifted, unshifted, x1, x2, L, min_L, order)


def _odd_block_sums(nl: StaticNonlinearity, first: float, second_mag: float, L: int) -> tuple[float, float]:
    """Closed-form (shifted, unshifted) integrals for blocks ``first, -second_mag, ...``."""
    p, q = first, -second_mag
    dp, dq = nl(p), nl(q)
    unshifted = (L + 1) * (p * dp + q * dq)
    shifted = (L + 1) * p * dq + L * q * dp
    return shifted, unshifted


def falsify_noneven_odd(nl: StaticNonlinearity, L: int, dt: float = DEFAULT_DT,
                        magnitudes: Sequence[float] | None = None) -> ClassReport:
    """Search the two alternating-sign block constructions for a violation of
    ``|int x(t+tau) Delta(x(t)) dt| <= int x(t) Delta(x(t)) dt``.

    Pairs ``0 < x1 < x2`` are drawn from a magnitude grid built around the
    breakpoints; the construction with the most negative normalised margin
    is rebuilt as a sampled trace and evaluated numerically.
    """
    if not nl.is_monotone:
        raise PreconditionViolation("odd-class test needs a monotone map; use falsify_nonmonotone")
    if magnitudes is None:
        pos = np.abs(nl.breakpoints[nl.breakpoints != 0])
        top = 2.0 * float(pos.max()) if pos.size else 2.0
        magnitudes = np.unique(np.concatenate((pos, np.geomspace(top / 200.0, top, 40))))
    mags = np.asarray(sorted(set(float(m) for m in magnitudes if m > 0)))
    best = None
    for i, x1 in enumerate(mags):
        for x2 in mags[i + 1:]:
            for kind, first, second in (("x1/-x2", x1, x2), ("x2/-x1", x2, x1)):
                sh, un = _odd_block_sums(nl, first, second, L)
                m = un - abs(sh)
                norm = (L + 1) * (first**2 + second**2)
                key = m / norm
                if best is None or key < best[0]:
                    best = (key, kind, first, second, float(x1), float(x2))
    if best is None:
        return ClassReport("odd_static", True, math.inf, None, {"L": L, "pairs": 0})
    _, kind, first, second, x1, x2 = best
    trace = SignalTrace.blocks(_block_levels(first, -second, L), dt=dt)
    shifted, unshifted = _shift_integrals(nl, trace)
    margin = unshifted - abs(shifted)
    scale = max(1.0, abs(unshifted))
    violated = margin < -1e-9 * scale
    witness = {
        "construction": kind,
        "x1": x1,
        "x2": x2,
        "L": L,
        "shifted": shifted,
        "unshifted": unshifted,
        "dt": dt,
        "levels": [first, -second],
    }
    return ClassReport(
        test="odd_static",
        member=not violated,
        margin=margin,
        witness=witness if violated else None,
        details={"L": L, "pairs_scanned": int(len(mags) * (len(mags) - 1)), "worst": witness},
    )


def _lti_witness(alpha: float, beta: float, omega: float) -> dict:
    """Delay ``tau`` making ``Re{Delta(jw)(1 + exp(jw tau))}`` negative, by case."""
    ab = max(1.0, abs(alpha), abs(beta))
    if abs(beta) <= 1e-12 * ab:
        if alpha < 0:
            tau = math.pi / (2.0 * omega)
            case = "beta=0, alpha<0"
        else:
            return {"case": "beta=0, alpha>=0", "omega": omega, "tau": None, "value": None,
                    "alpha": alpha, "beta": beta}
    elif abs(alpha) <= 1e-12 * ab:
        tau = (math.pi / 2.0 if beta > 0 else 3.0 * math.pi / 2.0) / omega
        case = "alpha=0, beta!=0"
    else:
        half = math.atan((alpha + 1.0) / beta)
        if half < 0:
            half += math.pi
        tau = 2.0 * half / omega
        case = "alpha!=0, beta!=0"
    phase = omega * tau
    value = alpha * (1.0 + math.cos(phase)) - beta * math.sin(phase)
    out = {"case": case, "omega": omega, "tau": tau, "value": value, "alpha": alpha, "beta": beta}
    if case == "alpha!=0, beta!=0":
        out["tan_residual"] = math.tan(phase / 2.0) - (alpha + 1.0) / beta
    return out


def lti_membership_test(u: LtiUncertainty, grid: FrequencyGrid | None = None,
                        tau_samples: int = 64) -> ClassReport:
    """An LTI map is in the class iff its transfer function is a nonnegative constant.

    The condition ``Re{D(jw)(1 + exp(jw tau))} >= 0`` is sampled over the
    grid and a uniform grid of phases ``w tau``; an analytic violating delay
    is also constructed at each frequency following the case analysis on
    ``D(jw) = alpha + j beta``.
    """
    grid = grid or FrequencyGrid.default()
    w = grid.omegas
    vals = np.asarray(evaluate(u.tf, w), dtype=complex)
    if grid.include_infinity:
        w_all = np.append(w, math.inf)
        vals = np.append(vals, u.tf.feedthrough())
    else:
        w_all = w
    ref = vals[0]
    spread = float(np.max(np.abs(vals - ref)))
    constant = spread <= LTI_CONSTANT_TOL * max(1.0, abs(ref))

    phases = 2.0 * math.pi * np.arange(tau_samples) / tau_samples
    alpha, beta = vals.real, vals.imag
    cond = alpha[:, None] * (1.0 + np.cos(phases))[None, :] - beta[:, None] * np.sin(phases)[None, :]
    i, j = np.unravel_index(int(np.argmin(cond)), cond.shape)
    sampled_min = float(cond[i, j])
    sampled_at = {
        "omega": "inf" if math.isinf(w_all[i]) else float(w_all[i]),
        "phase": float(phases[j]),
        "tau": (float(phases[j] / w_all[i]) if 0 < w_all[i] < math.inf else None),
        "value": sampled_min,
    }

    witness = None
    for k, om in enumerate(w):
        if om <= 0:
            continue
        cand = _lti_witness(float(alpha[k]), float(beta[k]), float(om))
        if cand["value"] is not None and cand["value"] < 0:
            if witness is None or cand["value"] < witness["value"] - 1e-15:
                witness = cand
    if witness is None and w.size and w[0] == 0 and alpha[0] < 0:
        witness = {"case": "omega=0, alpha<0", "omega": 0.0, "tau": 0.0,
                   "value": 2.0 * float(alpha[0]), "alpha": float(alpha[0]), "beta": 0.0}

    tol = 1e-12 * max(1.0, float(np.max(np.abs(vals))))
    violated = sampled_min < -tol or witness is not None
    member = constant and not violated
    if not member and witness is None and not constant:
        witness = {"case": "nonconstant", "spread": spread}
    margin = min(sampled_min, witness["value"] if witness and witness.get("value") is not None else math.inf)
    return ClassReport(
        test="lti",
        member=member,
        margin=margin,
        witness=None if member else witness,
        details={"constant": constant, "spread": spread, "sampled": sampled_at,
                 "grid": grid.describe(), "tau_samples": tau_samples},
    )


def homotopy_sweep(nl: StaticNonlinearity, band: SlopeBand, theta_steps: int = 11) -> ClassReport:
    """Check that ``theta * Delta + (1 - theta) * a`` stays in the class for ``theta`` in [0, 1]."""
    base = membership_test_static(nl, band, trials=0)
    if not base.member:
        raise PreconditionViolation("homotopy sweep needs a member of the band")
    rows = []
    ok = True
    worst = math.inf
    for theta in np.linspace(0.0, 1.0, theta_steps):
        rep = membership_test_static(nl.blend(float(theta), band.a), band, trials=0)
        rows.append({"theta": float(theta), "member": rep.member, "margin": rep.margin})
        ok &= rep.member
        worst = min(worst, rep.margin)
    return ClassReport("homotopy", ok, worst, None, {"band": band.to_dict(), "steps": rows})


def _direction_increments(nl: StaticNonlinearity, band: SlopeBand) -> tuple[np.ndarray, np.ndarray]:
    s = nl.slopes()
    return 1.0 - band.binv * s, s - band.a


def transformed_relation_is_monotone(nl: StaticNonlinearity, band: SlopeBand) -> bool:
    """Whether ``xbar = x - Delta(x)/b  ->  ybar = -a x + Delta(x)`` is a monotone relation.

    Along each segment of slope ``s`` the pair moves by ``(1 - s/b, s - a)``
    per unit of ``x``; the relation is nondecreasing iff both increments are
    nonnegative on every segment.
    """
    dx, dy = _direction_increments(nl, band)
    return bool(np.all(dx >= 0) and np.all(dy >= 0))


def loop_transform(nl: StaticNonlinearity, band: SlopeBand) -> StaticNonlinearity:
    """The map ``xbar -> ybar`` as a piecewise-linear function (needs every slope < b)."""
    dx, dy = _direction_increments(nl, band)
    if np.any(dx <= 0):
        raise ValueError("xbar is not strictly increasing in x; the transformed relation is not a function")
    bp = nl.breakpoints
    v = nl.values
    return StaticNonlinearity(bp - band.binv * v, -band.a * bp + v, dy[0] / dx[0], dy[-1] / dx[-1])
