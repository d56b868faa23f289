"""Dense tableau simplex with Bland's rule.

Solves ``max c^T x  s.t.  A x <= b, x >= 0`` for ``b >= 0`` (the origin is
feasible, so no phase one is needed).  The tableau is kept in condensed
(Tucker) form: one row per basic variable and one column per nonbasic
variable, which keeps each pivot at ``O(m n)`` for the tall, narrow problems
produced by frequency gridding.

Pivoting is deterministic, so identical inputs give bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverFailure

__all__ = ["LPResult", "simplex_max"]


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    objective: float
    iterations: int
    status: str  # "optimal" or "unbounded"


def simplex_max(
    c,
    A,
    b,
    tol: float = 1e-11,
    max_iter: int = 50_000,
) -> LPResult:
    c = np.asarray(c, dtype=float).ravel()
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    m, n = A.shape
    if c.size != n or b.size != m:
        raise ValueError("inconsistent LP dimensions")
    if np.any(b < 0):
        raise SolverFailure("simplex_max requires b >= 0 (origin must be feasible)")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
        raise SolverFailure("LP data contains non-finite entries")

    T = np.zeros((m + 1, n + 1))
    T[:m, :n] = A
    T[:m, n] = b
    T[m, :n] = -c
    # variable labels: 0..n-1 structural, n..n+m-1 slack
    col_var = np.arange(n)
    row_var = np.arange(n, n + m)

    scale = max(1.0, float(np.max(np.abs(A))) if A.size else 1.0)
    ptol = tol * scale

    for it in range(max_iter):
        obj = T[m, :n]
        cand = np.flatnonzero(obj < -tol)
        if cand.size == 0:
            break
        s = int(cand[np.argmin(col_var[cand])])
        colv = T[:m, s]
        pos = np.flatnonzero(colv > ptol)
        if pos.size == 0:
            return LPResult(np.full(n, np.nan), np.inf, it, "unbounded")
        ratios = T[pos, n] / colv[pos]
        rmin = ratios.min()
        ties = pos[ratios <= rmin + tol * max(1.0, abs(rmin))]
        r = int(ties[np.argmin(row_var[ties])])

        p = T[r, s]
        prow = T[r, :] / p
        pcol = T[:, s].copy()
        T -= np.outer(pcol, prow)
        T[r, :] = prow
        T[:, s] = -pcol / p
        T[r, s] = 1.0 / p
        col_var[s], row_var[r] = row_var[r], col_var[s]
        # clamp round-off in the right-hand side
        rhs = T[:m, n]
        if np.any(rhs < -1e-7 * max(1.0, float(np.max(np.abs(rhs))))):
            raise SolverFailure("simplex lost primal feasibility (numerical breakdown)")
        np.maximum(rhs, 0.0, out=rhs)
    else:
        raise SolverFailure(f"simplex hit the iteration cap ({max_iter})")

    x = np.zeros(n)
    basic = row_var < n
    x[row_var[basic]] = T[:m, n][basic]
    return LPResult(x, float(c @ x), it, "optimal")
