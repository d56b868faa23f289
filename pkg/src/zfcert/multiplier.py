"""Finite-dimensional Zames-Falb kernels and the multiplier matrices they induce.

A kernel ``z`` is a nonnegative combination of unit-mass exponentials

* causal:      ``lam * exp(-lam t)`` for ``t >= 0``, transform ``lam / (lam + jw)``
* anticausal:  ``lam * exp(lam t)``  for ``t <= 0``, transform ``lam / (lam - jw)``

with separate coefficient vectors for the positive and negative parts.  The
multiplier is ``M(jw) = 1 - Z(jw)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, InfiniteB
from .lti import FrequencyGrid, RationalTF, evaluate

__all__ = [
    "CAUSAL",
    "ANTICAUSAL",
    "BUDGET_TOL",
    "KernelBasis",
    "MultiplierCandidate",
    "SlopeBand",
    "PiMatrix",
    "z_transform_value",
    "l1_budget",
    "build_pi_monotone",
    "build_pi_slope",
    "loop_kernel",
    "condition_values",
    "condition_margin",
]

CAUSAL = "causal"
ANTICAUSAL = "anticausal"
BUDGET_TOL = 1e-12
DEFAULT_RATE_RANGE = (1e-2, 1e2)
DEFAULT_N_RATES = 10


@dataclass(frozen=True)
class SlopeBand:
    """Slope restriction ``a <= dDelta/dx <= b`` with ``0 <= a < b <= inf``."""

    a: float = 0.0
    b: float = math.inf

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and a >= 0.0):
            raise ValueError(f"slope band needs finite a >= 0, got a={a}")
        if math.isnan(b) or not b > a:
            raise ValueError(f"slope band needs b > a, got a={a}, b={b}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def binv(self) -> float:
        return 0.0 if math.isinf(self.b) else 1.0 / self.b

    @property
    def is_monotone(self) -> bool:
        return self.a == 0.0 and math.isinf(self.b)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": "inf" if math.isinf(self.b) else self.b}

    @classmethod
    def from_dict(cls, d: dict) -> "SlopeBand":
        return cls(float(d["a"]), float(d["b"]))

    def __str__(self) -> str:
        return f"[{self.a:g}, {self.b:g}]"


def _farthest_point_order(n: int) -> list[int]:
    """Index ordering whose prefixes spread evenly over ``range(n)``."""
    if n == 0:
        return []
    order = [(n - 1) // 2]
    remaining = set(range(n)) - set(order)
    while remaining:
        best = max(sorted(remaining), key=lambda i: min(abs(i - j) for j in order))
        order.append(best)
        remaining.remove(best)
    return order


@dataclass(frozen=True)
class KernelBasis:
    """Ordered list of ``(side, rate)`` unit-L1 exponential kernels."""

    sides: tuple
    rates: tuple

    def __post_init__(self):
        sides = tuple(str(s) for s in self.sides)
        rates = tuple(float(r) for r in self.rates)
        if len(sides) != len(rates):
            raise ValueError("sides and rates must have equal length")
        for s in sides:
            if s not in (CAUSAL, ANTICAUSAL):
                raise ValueError(f"unknown kernel side {s!r}")
        for r in rates:
            if not (math.isfinite(r) and r > 0):
                raise ValueError(f"kernel rates must be positive and finite, got {r}")
        object.__setattr__(self, "sides", sides)
        object.__setattr__(self, "rates", rates)

    @classmethod
    def empty(cls) -> "KernelBasis":
        return cls((), ())

    @classmethod
    def mirrored(cls, rates: Sequence[float]) -> "KernelBasis":
        """Causal/anticausal pair for each rate, in the given rate order."""
        sides, out = [], []
        for r in rates:
            sides += [CAUSAL, ANTICAUSAL]
            out += [float(r), float(r)]
        return cls(tuple(sides), tuple(out))

    @classmethod
    def default(
        cls,
        size: int = 2 * DEFAULT_N_RATES,
        lo: float = DEFAULT_RATE_RANGE[0],
        hi: float = DEFAULT_RATE_RANGE[1],
    ) -> "KernelBasis":
        """``size // 2`` log-spaced rates on ``[lo, hi]``, each as a mirrored pair."""
        n = int(size) // 2
        if n == 0:
            return cls.empty()
        if n == 1:
            return cls.mirrored([math.sqrt(lo * hi)])
        return cls.mirrored(np.logspace(math.log10(lo), math.log10(hi), n))

    @classmethod
    def nested(
        cls,
        max_size: int,
        lo: float = DEFAULT_RATE_RANGE[0],
        hi: float = DEFAULT_RATE_RANGE[1],
    ) -> "KernelBasis":
        """Like :meth:`default` but ordered so every even-length prefix is well spread.

        ``nested(n).prefix(k)`` for increasing ``k`` gives nested bases, which
        is what makes an LP ladder monotone.
        """
        full = cls.default(max_size, lo, hi)
        n = len(full) // 2
        rates = [full.rates[2 * i] for i in _farthest_point_order(n)]
        return cls.mirrored(rates)

    def prefix(self, k: int) -> "KernelBasis":
        return KernelBasis(self.sides[:k], self.rates[:k])

    def __len__(self) -> int:
        return len(self.rates)

    def transforms(self, omegas) -> np.ndarray:
        """Fourier transforms, shape ``(len(omegas), len(self))``."""
        w = np.atleast_1d(np.asarray(omegas, dtype=float))[:, None]
        lam = np.asarray(self.rates, dtype=float)[None, :]
        sign = np.array([1.0 if s == CAUSAL else -1.0 for s in self.sides])[None, :]
        if lam.size == 0:
            return np.zeros((w.shape[0], 0), dtype=complex)
        return lam / (lam + 1j * sign * w)

    def kernels(self, t) -> np.ndarray:
        """Time-domain kernels, shape ``(len(t), len(self))``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))[:, None]
        lam = np.asarray(self.rates, dtype=float)[None, :]
        causal = np.array([s == CAUSAL for s in self.sides])[None, :]
        out = np.where(causal, np.where(t >= 0, lam * np.exp(-lam * np.abs(t)), 0.0),
                       np.where(t <= 0, lam * np.exp(-lam * np.abs(t)), 0.0))
        return out

    def mirror(self) -> "KernelBasis":
        flip = {CAUSAL: ANTICAUSAL, ANTICAUSAL: CAUSAL}
        return KernelBasis(tuple(flip[s] for s in self.sides), self.rates)

    def describe(self) -> dict:
        return {
            "size": len(self),
            "rates": list(self.rates),
            "sides": list(self.sides),
        }


@dataclass(frozen=True, eq=False)
class MultiplierCandidate:
    """Kernel ``z = sum (cpos - cneg) * basis`` with nonnegative coefficient vectors.

    In ``"nonneg"`` mode ``cneg`` is identically zero and the L1 budget
    ``sum(cpos)`` is the exact ``||z||_1``.  In ``"signed"`` mode the budget
    ``sum(cpos + cneg)`` is only an upper bound on ``||z||_1``.
    """

    basis: KernelBasis
    cpos: np.ndarray
    cneg: np.ndarray
    mode: str = "nonneg"

    def __init__(self, basis: KernelBasis, cpos=None, cneg=None, mode: str = "nonneg"):
        if mode not in ("nonneg", "signed"):
            raise ValueError(f"mode must be 'nonneg' or 'signed', got {mode!r}")
        n = len(basis)
        cpos = np.zeros(n) if cpos is None else np.asarray(cpos, dtype=float).ravel()
        cneg = np.zeros(n) if cneg is None else np.asarray(cneg, dtype=float).ravel()
        if cpos.size != n or cneg.size != n:
            raise ValueError("coefficient vectors must match the basis size")
        if np.any(cpos < 0) or np.any(cneg < 0) or not (np.all(np.isfinite(cpos)) and np.all(np.isfinite(cneg))):
            raise ValueError("coefficients must be finite and nonnegative")
        if mode == "nonneg" and np.any(cneg != 0):
            raise ValueError("nonneg mode forbids negative kernel parts")
        cpos.setflags(write=False)
        cneg.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "cpos", cpos)
        object.__setattr__(self, "cneg", cneg)
        object.__setattr__(self, "mode", mode)

    @classmethod
    def zero(cls, basis: KernelBasis | None = None, mode: str = "nonneg") -> "MultiplierCandidate":
        return cls(basis or KernelBasis.empty(), mode=mode)

    @property
    def weights(self) -> np.ndarray:
        return self.cpos - self.cneg

    def mirror(self) -> "MultiplierCandidate":
        """Candidate for the time-reversed kernel ``z(-t)``; its transform is ``Z(jw)*``."""
        return MultiplierCandidate(self.basis.mirror(), self.cpos, self.cneg, self.mode)

    def kernel(self, t) -> np.ndarray:
        return self.basis.kernels(t) @ self.weights

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiplierCandidate):
            return NotImplemented
        return (
            self.mode == other.mode
            and self.basis == other.basis
            and np.array_equal(self.cpos, other.cpos)
            and np.array_equal(self.cneg, other.cneg)
        )

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "rates": list(self.basis.rates),
            "sides": list(self.basis.sides),
            "cpos": [float(c) for c in self.cpos],
            "cneg": [float(c) for c in self.cneg],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MultiplierCandidate":
        basis = KernelBasis(tuple(d["sides"]), tuple(d["rates"]))
        return cls(basis, d["cpos"], d["cneg"], d["mode"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "MultiplierCandidate":
        return cls.from_dict(json.loads(text))


def z_transform_value(cand: MultiplierCandidate, omega):
    """``Z(jw)`` in closed form; zero at ``omega = inf``.  Accepts arrays."""
    if np.isscalar(omega) and math.isinf(omega):
        return 0j
    vals = cand.basis.transforms(omega) @ cand.weights
    if np.ndim(omega) == 0:
        return complex(vals[0])
    return vals


def l1_budget(cand: MultiplierCandidate) -> float:
    """``sum(cpos + cneg)``: equal to ``||z||_1`` in nonneg mode, an upper bound otherwise."""
    return float(np.sum(cand.cpos) + np.sum(cand.cneg))


def _check_budget(cand: MultiplierCandidate) -> None:
    budget = l1_budget(cand)
    if budget > 1.0 + BUDGET_TOL:
        raise BudgetExceeded(f"kernel L1 budget {budget:.12g} exceeds 1")


class PiMatrix:
    """Frequency-indexed 2x2 Hermitian multiplier.

    ``form`` is ``"monotone"`` (zero diagonal, off-diagonal ``1 - Z`` and its
    conjugate) or ``"slope"`` (the two-sided ``[a, b]`` form).  Calling the
    object returns an array of shape ``(2, 2)`` or ``(n, 2, 2)``.
    """

    def __init__(self, cand: MultiplierCandidate, band: SlopeBand | None = None):
        self.cand = cand
        self.band = band
        self.form = "monotone" if band is None else "slope"

    def m_values(self, omega) -> np.ndarray:
        if np.isscalar(omega) and math.isinf(omega):
            return np.array([1.0 + 0j])
        return 1.0 - np.atleast_1d(z_transform_value(self.cand, np.atleast_1d(omega)))

    def __call__(self, omega) -> np.ndarray:
        scalar = np.ndim(omega) == 0
        m = self.m_values(omega)
        mc = m.conj()
        out = np.empty((m.size, 2, 2), dtype=complex)
        if self.form == "monotone":
            out[:, 0, 0] = 0.0
            out[:, 0, 1] = mc
            out[:, 1, 0] = m
            out[:, 1, 1] = 0.0
        else:
            a, binv = self.band.a, self.band.binv
            out[:, 0, 0] = -a * (m + mc)
            out[:, 0, 1] = a * binv * m + mc
            out[:, 1, 0] = a * binv * mc + m
            out[:, 1, 1] = -binv * (m + mc)
        return out[0] if scalar else out

    def quadratic(self, omega, u, v) -> np.ndarray:
        """``[u; v]^* Pi(jw) [u; v]`` (real part; the form is Hermitian)."""
        P = self(np.atleast_1d(omega))
        u = np.broadcast_to(np.asarray(u, dtype=complex), P.shape[:1])
        v = np.broadcast_to(np.asarray(v, dtype=complex), P.shape[:1])
        q = (u.conj() * (P[:, 0, 0] * u + P[:, 0, 1] * v)
             + v.conj() * (P[:, 1, 0] * u + P[:, 1, 1] * v))
        return q.real

    def norm_sup(self, grid: FrequencyGrid) -> float:
        """Largest singular value over the grid, including the limit at infinity."""
        P = self(grid.omegas) if grid.omegas.size else np.zeros((0, 2, 2), dtype=complex)
        if grid.include_infinity or P.shape[0] == 0:
            P = np.concatenate((P, self(math.inf)[None]), axis=0)
        return float(np.max(np.linalg.norm(P, ord=2, axis=(1, 2))))


def build_pi_monotone(cand: MultiplierCandidate) -> PiMatrix:
    _check_budget(cand)
    return PiMatrix(cand)


def build_pi_slope(cand: MultiplierCandidate, band: SlopeBand) -> PiMatrix:
    _check_budget(cand)
    if math.isinf(band.b):
        raise InfiniteB("slope form needs finite b; use build_pi_monotone for b = inf")
    return PiMatrix(cand, band)


def loop_kernel(g_vals: np.ndarray, band: SlopeBand) -> np.ndarray:
    """``K = (G - 1/b)(a G^* - 1)``; reduces to ``-G`` for the monotone band."""
    g_vals = np.asarray(g_vals, dtype=complex)
    return (g_vals - band.binv) * (band.a * g_vals.conj() - 1.0)


def condition_values(
    g: RationalTF,
    cand: MultiplierCandidate,
    band: SlopeBand,
    grid: FrequencyGrid,
) -> np.ndarray:
    """``Re{(1 - Z) K}`` at every grid point, the infinity limit last if present."""
    w = grid.omegas
    vals = np.zeros(0)
    if w.size:
        K = loop_kernel(evaluate(g, w), band)
        M = 1.0 - z_transform_value(cand, w)
        vals = (M * K).real
    if grid.include_infinity:
        k_inf = loop_kernel(np.array([g.feedthrough()]), band)[0]
        vals = np.append(vals, k_inf.real)
    return vals


def condition_margin(
    g: RationalTF,
    cand: MultiplierCandidate,
    band: SlopeBand,
    grid: FrequencyGrid,
) -> float:
    """Smallest value of the frequency-domain condition over the grid.

    Positive means the condition holds at grid resolution with that margin.
    """
    _check_budget(cand)
    vals = condition_values(g, cand, band, grid)
    if vals.size == 0:
        raise ValueError("empty grid")
    return float(np.min(vals))
