"""Real-rational SISO transfer functions in continuous time.

Polynomials carry real coefficients in descending powers of ``s``.  Every
frequency-domain condition in the package reduces to evaluating a
:class:`RationalTF` on the imaginary axis, so this module keeps evaluation
vectorised over numpy arrays of frequencies.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np
import scipy.linalg

from .errors import DegenerateInput, EmptyGrid, NotInRHInf, PoleOnAxis

__all__ = [
    "Polynomial",
    "RationalTF",
    "FrequencyGrid",
    "DEFAULT_GRID_POINTS",
    "HURWITZ_TOL",
    "evaluate",
    "is_hurwitz",
    "routh_hurwitz",
    "in_rh_inf",
    "nyquist_samples",
    "interval_clearance",
    "hinf_norm_estimate",
    "load_plant",
    "plant_from_dict",
]

HURWITZ_TOL = 1e-9
DEFAULT_GRID_POINTS = 2000
DEFAULT_OMEGA_RANGE = (1e-3, 1e3)
POLE_ON_AXIS_RTOL = 1e-12

Number = Union[int, float]


def _strip(coeffs: Iterable[Number]) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(list(coeffs), dtype=float))
    if arr.size == 0:
        return np.zeros(1)
    if not np.all(np.isfinite(arr)):
        raise DegenerateInput("polynomial coefficients must be finite")
    nz = np.flatnonzero(arr)
    if nz.size == 0:
        return np.zeros(1)
    return arr[nz[0]:].copy()


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Real polynomial, coefficients in descending powers of ``s``.

    Leading zeros are stripped on construction; the zero polynomial is
    stored as ``[0.0]``.
    """

    coeffs: np.ndarray

    def __init__(self, coeffs: Iterable[Number]):
        arr = _strip(coeffs)
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 1 and self.coeffs[0] == 0.0

    @property
    def leading(self) -> float:
        return float(self.coeffs[0])

    def __call__(self, s):
        return np.polyval(self.coeffs, s)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(np.polyadd(self.coeffs, _as_poly(other).coeffs))

    __radd__ = __add__

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(np.polysub(self.coeffs, _as_poly(other).coeffs))

    def __rsub__(self, other) -> "Polynomial":
        return _as_poly(other) - self

    def __mul__(self, other) -> "Polynomial":
        return Polynomial(np.polymul(self.coeffs, _as_poly(other).coeffs))

    __rmul__ = __mul__

    def __neg__(self) -> "Polynomial":
        return Polynomial(-self.coeffs)

    def __pow__(self, n: int) -> "Polynomial":
        out = Polynomial([1.0])
        for _ in range(int(n)):
            out = out * self
        return out

    def roots(self) -> np.ndarray:
        """Roots via eigenvalues of the (balanced) companion matrix."""
        if self.is_zero:
            raise DegenerateInput("zero polynomial has no well-defined roots")
        if self.degree == 0:
            return np.zeros(0, dtype=complex)
        monic = self.coeffs / self.coeffs[0]
        # LAPACK geev balances the matrix before the QR iteration.
        return scipy.linalg.eigvals(scipy.linalg.companion(monic))

    def tolist(self) -> list[float]:
        return [float(c) for c in self.coeffs]

    def __repr__(self) -> str:
        return f"Polynomial({self.tolist()})"


def _as_poly(p) -> Polynomial:
    if isinstance(p, Polynomial):
        return p
    if np.isscalar(p):
        return Polynomial([float(p)])
    return Polynomial(p)


S = Polynomial([1.0, 0.0])


@dataclass(frozen=True, eq=False)
class RationalTF:
    """``num(s) / den(s)`` with the denominator scaled to be monic."""

    num: Polynomial
    den: Polynomial

    def __init__(self, num, den=(1.0,)):
        num = _as_poly(num)
        den = _as_poly(den)
        if den.is_zero:
            raise DegenerateInput("denominator is identically zero")
        lead = den.leading
        object.__setattr__(self, "num", Polynomial(num.coeffs / lead))
        object.__setattr__(self, "den", Polynomial(den.coeffs / lead))

    @classmethod
    def constant(cls, c: float) -> "RationalTF":
        return cls([c], [1.0])

    @property
    def is_proper(self) -> bool:
        return self.num.is_zero or self.num.degree <= self.den.degree

    @property
    def is_strictly_proper(self) -> bool:
        return self.num.is_zero or self.num.degree < self.den.degree

    def feedthrough(self) -> float:
        """Limit of the transfer function as ``|s| -> inf`` (proper only)."""
        if not self.is_proper:
            raise NotInRHInf("improper transfer function has no finite limit at infinity")
        if self.is_strictly_proper:
            return 0.0
        return self.num.leading / self.den.leading

    def poles(self) -> np.ndarray:
        return self.den.roots()

    def __call__(self, s):
        return self.num(s) / self.den(s)

    def __neg__(self) -> "RationalTF":
        return RationalTF(-self.num, self.den)

    def __add__(self, other) -> "RationalTF":
        other = _as_tf(other)
        if self.den == other.den:
            return RationalTF(self.num + other.num, self.den)
        return RationalTF(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other) -> "RationalTF":
        return self + (-_as_tf(other))

    def __rsub__(self, other) -> "RationalTF":
        return _as_tf(other) - self

    def __mul__(self, other) -> "RationalTF":
        other = _as_tf(other)
        return RationalTF(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {"num": self.num.tolist(), "den": self.den.tolist()}

    def __repr__(self) -> str:
        return f"RationalTF(num={self.num.tolist()}, den={self.den.tolist()})"


def _as_tf(x) -> RationalTF:
    if isinstance(x, RationalTF):
        return x
    if isinstance(x, Polynomial):
        return RationalTF(x, [1.0])
    return RationalTF.constant(float(x))


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Sorted nonnegative frequencies (rad/s) plus an optional symbolic infinity.

    Infinity is never stored as a float; ``include_infinity`` asks consumers
    to add the ``omega -> inf`` limit (the feedthrough term) separately.
    """

    omegas: np.ndarray
    include_infinity: bool = True
    label: str = field(default="custom", compare=False)

    def __init__(self, omegas: Sequence[float], include_infinity: bool = True, label: str = "custom"):
        arr = np.asarray(omegas, dtype=float).ravel()
        if not np.all(np.isfinite(arr)):
            raise ValueError("grid frequencies must be finite; use include_infinity for omega = inf")
        if arr.size and arr[0] < 0:
            raise ValueError("grid frequencies must be nonnegative")
        if arr.size > 1 and np.any(np.diff(arr) <= 0):
            raise ValueError("grid frequencies must be strictly increasing")
        arr.setflags(write=False)
        object.__setattr__(self, "omegas", arr)
        object.__setattr__(self, "include_infinity", bool(include_infinity))
        object.__setattr__(self, "label", label)

    @classmethod
    def logspace(
        cls,
        n: int = DEFAULT_GRID_POINTS,
        lo: float = DEFAULT_OMEGA_RANGE[0],
        hi: float = DEFAULT_OMEGA_RANGE[1],
        include_zero: bool = True,
        include_infinity: bool = True,
    ) -> "FrequencyGrid":
        pts = np.logspace(math.log10(lo), math.log10(hi), int(n))
        if include_zero:
            pts = np.concatenate(([0.0], pts))
        return cls(pts, include_infinity, label=f"log{int(n)}[{lo:g},{hi:g}]")

    @classmethod
    def default(cls) -> "FrequencyGrid":
        return cls.logspace()

    def refine(self, factor: int = 10) -> "FrequencyGrid":
        """Grid containing every point of ``self`` with ``factor`` sub-intervals per interval.

        Sub-intervals are log-spaced between positive neighbours so a
        log-uniform grid stays log-uniform.
        """
        w = self.omegas
        if w.size < 2 or factor <= 1:
            return self
        pieces = []
        for lo, hi in zip(w[:-1], w[1:]):
            if lo > 0:
                seg = np.exp(np.linspace(math.log(lo), math.log(hi), factor + 1)[:-1])
                seg[0] = lo
            else:
                seg = np.linspace(lo, hi, factor + 1)[:-1]
            pieces.append(seg)
        pieces.append(w[-1:])
        return FrequencyGrid(np.concatenate(pieces), self.include_infinity, label=f"{self.label}x{factor}")

    def __len__(self) -> int:
        return self.omegas.size + int(self.include_infinity)

    def labels(self) -> list:
        out: list = [float(w) for w in self.omegas]
        if self.include_infinity:
            out.append("inf")
        return out

    def describe(self) -> dict:
        return {
            "label": self.label,
            "n_finite": int(self.omegas.size),
            "include_infinity": self.include_infinity,
            "omega_min": float(self.omegas[0]) if self.omegas.size else None,
            "omega_max": float(self.omegas[-1]) if self.omegas.size else None,
        }


def evaluate(tf: RationalTF, omega):
    """Value of ``tf`` at ``s = j*omega``.

    ``omega`` may be a float, ``math.inf`` (feedthrough limit) or an array of
    finite frequencies; negative frequencies are allowed.
    """
    if np.isscalar(omega) and math.isinf(omega):
        return complex(tf.feedthrough())
    w = np.asarray(omega, dtype=float)
    s = 1j * w
    den = tf.den(s)
    scale = float(np.max(np.abs(tf.den.coeffs)))
    if np.any(np.abs(den) < POLE_ON_AXIS_RTOL * scale):
        bad = w[np.abs(den) < POLE_ON_AXIS_RTOL * scale] if w.ndim else w
        raise PoleOnAxis(f"denominator vanishes at omega = {np.ravel(bad)[0]:g}")
    val = tf.num(s) / den
    if w.ndim == 0:
        return complex(val)
    return val


def evaluate_mirrored(tf: RationalTF, omegas) -> np.ndarray:
    """Evaluate on ``[-w_n, ..., -w_1, w_1, ..., w_n]`` for conjugate-symmetry checks."""
    w = np.asarray(omegas, dtype=float)
    return evaluate(tf, np.concatenate((-w[::-1], w)))


def is_hurwitz(p: Polynomial, tol: float = HURWITZ_TOL) -> bool:
    """True iff every root of ``p`` has real part below ``-tol``."""
    p = _as_poly(p)
    if p.is_zero:
        raise DegenerateInput("zero polynomial")
    r = p.roots()
    return bool(np.all(r.real < -tol))


def routh_hurwitz(p: Polynomial) -> bool:
    """Routh array test for strict Hurwitz stability.

    A zero anywhere in the first column is treated as a failure (roots on
    or to the right of the imaginary axis cannot be excluded).
    """
    p = _as_poly(p)
    if p.is_zero:
        raise DegenerateInput("zero polynomial")
    c = p.coeffs / p.coeffs[0]
    n = len(c) - 1
    if n == 0:
        return True
    if np.any(c <= 0):
        return False
    width = n // 2 + 1
    r0 = np.zeros(width)
    r1 = np.zeros(width)
    r0[: len(c[0::2])] = c[0::2]
    r1[: len(c[1::2])] = c[1::2]
    scale = np.max(np.abs(c))
    for _ in range(n - 1):
        if abs(r1[0]) <= 1e-14 * scale or r1[0] < 0:
            return False
        nxt = np.zeros(width)
        nxt[:-1] = (r1[0] * r0[1:] - r0[0] * r1[1:]) / r1[0]
        r0, r1 = r1, nxt
    return bool(r1[0] > 1e-14 * scale)


def in_rh_inf(tf: RationalTF) -> bool:
    return tf.is_proper and is_hurwitz(tf.den)


def rh_inf_violation(tf: RationalTF) -> str | None:
    """Name of the violated RH-infinity condition, or None."""
    if not tf.is_proper:
        return f"improper: deg(num)={tf.num.degree} > deg(den)={tf.den.degree}"
    if not is_hurwitz(tf.den):
        worst = float(np.max(tf.poles().real))
        return f"not stable: pole with real part {worst:.3g} >= 0"
    return None


def nyquist_samples(tf: RationalTF, grid: FrequencyGrid) -> np.ndarray:
    """Frequency response on the grid, with the feedthrough limit last if requested."""
    vals = evaluate(tf, grid.omegas) if grid.omegas.size else np.zeros(0, dtype=complex)
    vals = np.asarray(vals, dtype=complex)
    if grid.include_infinity:
        vals = np.append(vals, tf.feedthrough())
    return vals


def _segment_to_interval(p: np.ndarray, q: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Distance between each complex segment [p_i, q_i] and the real interval [lo, hi]."""

    def point_to_interval(z):
        dx = np.maximum.reduce([lo - z.real, np.zeros_like(z.real), z.real - hi])
        return np.hypot(dx, z.imag)

    def point_to_segment(x, a, b):
        d = b - a
        dd = (d * d.conj()).real
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.where(dd > 0, ((x - a) * d.conj()).real / dd, 0.0)
        t = np.clip(t, 0.0, 1.0)
        return np.abs(a + t * d - x)

    dist = np.minimum(point_to_interval(p), point_to_interval(q))
    for end in (lo, hi):
        if math.isfinite(end):
            dist = np.minimum(dist, point_to_segment(complex(end), p, q))
    # a segment that crosses the real axis inside [lo, hi] touches it
    crosses = (p.imag * q.imag) < 0
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(crosses, p.imag / (p.imag - q.imag), 0.0)
    xr = p.real + t * (q.real - p.real)
    hit = crosses & (xr >= lo) & (xr <= hi)
    return np.where(hit, 0.0, dist)


def interval_clearance(tf: RationalTF, grid: FrequencyGrid, lo: float, hi: float) -> float:
    """Minimum distance from the sampled Nyquist polyline to the real segment ``[lo, hi]``.

    ``hi`` may be ``math.inf``.  A positive value certifies that the curve
    misses the segment at grid resolution; by conjugate symmetry only the
    nonnegative-frequency half is needed.
    """
    if lo > hi:
        raise ValueError("interval_clearance requires lo <= hi")
    if len(grid) == 0:
        raise EmptyGrid("frequency grid is empty")
    z = nyquist_samples(tf, grid)
    if z.size == 1:
        return float(_segment_to_interval(z, z, lo, hi)[0])
    return float(np.min(_segment_to_interval(z[:-1], z[1:], lo, hi)))


def _golden_max(f, a: float, b: float, iters: int = 80) -> tuple[float, float]:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = (a + b) / 2.0
    return x, f(x)


def hinf_norm_estimate(tf: RationalTF, grid: FrequencyGrid | None = None) -> float:
    """Peak gain over the grid, refined by golden-section search near the best sample.

    This is a lower bound on the true H-infinity norm that is tight when the
    peak is resolved by the grid.
    """
    grid = grid or FrequencyGrid.default()
    w = grid.omegas
    best = abs(tf.feedthrough())
    if w.size == 0:
        return best
    mags = np.abs(evaluate(tf, w))
    k = int(np.argmax(mags))
    best = max(best, float(mags[k]))
    lo = w[max(k - 1, 0)]
    hi = w[min(k + 1, w.size - 1)]
    if hi > lo:
        _, val = _golden_max(lambda x: abs(evaluate(tf, x)), float(lo), float(hi))
        best = max(best, val)
    return best


def plant_from_dict(data: dict) -> RationalTF:
    """Build a plant from ``{"num": [...], "den": [...]}`` and require it to lie in RH-infinity."""
    if not isinstance(data, dict) or "num" not in data or "den" not in data:
        raise ValueError('plant must be a JSON object with "num" and "den" arrays')
    try:
        num = [float(c) for c in data["num"]]
        den = [float(c) for c in data["den"]]
    except (TypeError, ValueError) as exc:
        raise ValueError(f"plant coefficients must be numbers: {exc}") from None
    tf = RationalTF(num, den)
    why = rh_inf_violation(tf)
    if why is not None:
        raise NotInRHInf(f"plant rejected, not in RH-infinity ({why})")
    return tf


def load_plant(path: str | Path) -> RationalTF:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed plant JSON in {path}: {exc}") from None
    return plant_from_dict(data)
