"""Dense two-phase tableau simplex for standard-form linear programs.

Solves min q.x subject to G x = h, x >= 0. The implementation is
deterministic: Dantzig pricing with lowest-index tie-breaking, switching to
Bland's rule after a pivot cap to rule out cycling, and a fixed policy for
driving artificial variables out of the basis. Instance sizes here are tiny,
so a dense tableau is simpler and faster than anything clever.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Entries smaller than this never serve as pivots.
PIVOT_TOL = 1e-10

# Phase 1 declares infeasibility when its objective exceeds this (scaled).
PHASE1_TOL = 1e-9


@dataclass(frozen=True)
class SimplexResult:
    status: str  # optimal | infeasible | unbounded | stalled
    x: np.ndarray
    objective: float
    basis: tuple
    pivots: int


def _pivot(M: np.ndarray, basis: list, row: int, col: int) -> None:
    M[row] /= M[row, col]
    factors = M[:, col].copy()
    factors[row] = 0.0
    M -= np.outer(factors, M[row])
    basis[row] = col


def _run_pivots(M, basis, ncols, *, bland, bland_after, max_pivots, start_count):
    """Pivot M (objective in the last row, rhs in the last column) to optimality."""
    pivots = start_count
    while True:
        reduced = M[-1, :ncols]
        use_bland = bland or pivots >= bland_after
        if use_bland:
            negative = np.nonzero(reduced < -PIVOT_TOL)[0]
            if negative.size == 0:
                return "optimal", pivots
            col = int(negative[0])
        else:
            col = int(np.argmin(reduced))
            if reduced[col] >= -PIVOT_TOL:
                return "optimal", pivots
        column = M[:-1, col]
        eligible = column > PIVOT_TOL
        if not eligible.any():
            return "unbounded", pivots
        ratios = np.full(column.shape, np.inf)
        ratios[eligible] = M[:-1, -1][eligible] / column[eligible]
        best = ratios.min()
        candidates = np.nonzero(ratios == best)[0]
        if use_bland:
            # leave the candidate with the smallest basis index
            row = int(min(candidates, key=lambda i: basis[i]))
        else:
            row = int(candidates[0])
        _pivot(M, basis, row, col)
        pivots += 1
        if pivots >= max_pivots:
            return "stalled", pivots


def solve_standard_form(
    G: np.ndarray,
    h: np.ndarray,
    q: np.ndarray,
    *,
    bland: bool = False,
    bland_after: int,
    max_pivots: int,
) -> SimplexResult:
    """Two-phase simplex on min q.x s.t. G x = h, x >= 0.

    Args:
        G: equality constraint matrix, shape (m, nv).
        h: right-hand side, shape (m,).
        q: cost vector, shape (nv,).
        bland: use Bland's rule from the first pivot (the restart policy).
        bland_after: pivot count after which Dantzig pricing hands over to
            Bland's rule.
        max_pivots: hard cap; exceeding it returns status "stalled".

    Returns:
        SimplexResult with x of length nv; redundant equality rows are
        dropped internally and reflected only in the basis length.
    """
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)
    q = np.asarray(q, dtype=float)
    m, nv = G.shape

    # Phase 1: minimize the sum of artificials from the all-artificial basis.
    work_g = G.copy()
    work_h = h.copy()
    flip = work_h < 0.0
    work_g[flip] *= -1.0
    work_h[flip] *= -1.0

    M = np.zeros((m + 1, nv + m + 1))
    M[:m, :nv] = work_g
    M[:m, nv : nv + m] = np.eye(m)
    M[:m, -1] = work_h
    M[-1, :] = -M[:m, :].sum(axis=0)
    M[-1, nv : nv + m] = 0.0
    basis = list(range(nv, nv + m))

    status, pivots = _run_pivots(
        M,
        basis,
        nv + m,
        bland=bland,
        bland_after=bland_after,
        max_pivots=max_pivots,
        start_count=0,
    )
    if status == "stalled":
        return SimplexResult("stalled", np.zeros(nv), np.nan, tuple(basis), pivots)
    phase1_obj = -M[-1, -1]
    if phase1_obj > PHASE1_TOL * max(1.0, float(np.abs(h).max(initial=0.0))):
        return SimplexResult("infeasible", np.zeros(nv), np.nan, tuple(basis), pivots)

    # Drive remaining artificials out of the basis; rows that admit no pivot
    # are redundant equalities and get dropped.
    redundant = []
    for row in range(m):
        if basis[row] < nv:
            continue
        candidates = np.nonzero(np.abs(M[row, :nv]) > PIVOT_TOL)[0]
        if candidates.size:
            _pivot(M, basis, row, int(candidates[0]))
            pivots += 1
        else:
            redundant.append(row)
    if redundant:
        keep = [r for r in range(m) if r not in redundant]
        M = M[keep + [m], :]
        basis = [basis[r] for r in keep]

    # Phase 2: true costs over the original columns only.
    rows = len(basis)
    tableau = np.zeros((rows + 1, nv + 1))
    tableau[:rows, :nv] = M[:rows, :nv]
    tableau[:rows, -1] = M[:rows, -1]
    cost_basis = q[basis]
    tableau[-1, :nv] = q - cost_basis @ tableau[:rows, :nv]
    tableau[-1, -1] = -float(cost_basis @ tableau[:rows, -1])

    status, pivots = _run_pivots(
        tableau,
        basis,
        nv,
        bland=bland,
        bland_after=bland_after,
        max_pivots=max_pivots,
        start_count=pivots,
    )
    x = np.zeros(nv)
    if status == "optimal":
        x[basis] = tableau[: len(basis), -1]
        np.maximum(x, 0.0, out=x)
    return SimplexResult(status, x, float(q @ x), tuple(basis), pivots)
