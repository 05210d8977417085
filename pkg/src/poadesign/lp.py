"""The price-of-anarchy linear program: constraint index set, full and
relaxed solves, and feasibility verification for candidate (F, rho) pairs.

The program has n + 1 variables (F(1..n), rho) and O(n^2) inequality
constraints. It is solved through its standard-form dual with a dense
two-phase simplex: the dual has n + 1 equality rows and one nonnegative
variable per constraint, which keeps the tableau at (n + 2) x O(n^2), and
the primal solution falls out of the final basis as the vector of simplex
multipliers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._simplex import solve_standard_form
from .errors import DimensionMismatchError, SolverError, ValidationError
from .mechanism import UtilityTable
from .welfare import WelfareTable

# A candidate point is feasible when its worst constraint violation is at
# most this, scaled by max(1, W(n)).
FEASIBILITY_TOL = 1e-8

# Tolerance on the duality gap between the recovered point and the dual
# objective, scaled by max(1, |rho|).
DUALITY_TOL = 1e-7

# The reported optimum must not undercut rho = 1 by more than this.
RHO_FLOOR_TOL = 1e-9

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_NUMERICAL_FAILURE = "numerical-failure"


@dataclass(frozen=True, order=True)
class ConstraintTriplet:
    """An index (x, y, z) of one constraint of the program."""

    x: int
    y: int
    z: int


@dataclass(frozen=True)
class LpSolution:
    """Solver output: the F variables, the objective rho, a status, and the
    constraints active at the optimum."""

    utility: Optional[UtilityTable]
    rho: float
    status: str
    binding: tuple

    @property
    def poa(self) -> float:
        return 1.0 / self.rho


@dataclass(frozen=True)
class FeasibilityReport:
    """Worst-case constraint evaluation for a candidate (F, rho) pair."""

    feasible: bool
    max_violation: float
    worst: ConstraintTriplet
    tolerance: float


def index_set(n: int) -> tuple:
    """All triplets (x, y, z) in {0..n}^3 with 1 <= x + y - z <= n,
    z <= min(x, y), and either x + y - z = n or (x - z)(y - z) z = 0.

    For fixed (x, y) the last condition confines z to {0, x, y, x + y - n},
    so the set has O(n^2) members; they are returned in lexicographic order.
    """
    if not isinstance(n, int) or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    found = set()
    for x in range(n + 1):
        for y in range(n + 1):
            for z in (0, x, y, x + y - n):
                if z < 0 or z > min(x, y):
                    continue
                covered = x + y - z
                if covered < 1 or covered > n:
                    continue
                if covered != n and (x - z) * (y - z) * z != 0:
                    continue
                found.add((x, y, z))
    return tuple(ConstraintTriplet(x, y, z) for x, y, z in sorted(found))


def _constraint_row(n: int, w: Sequence[float], x: int, y: int, z: int):
    """Row (coefficients over F(1..n), rho) and rhs for one constraint.

    The constraint is W(y) - rho W(x) + (x - z) F(x) - (y - z) F(x + 1) <= 0.
    F(0) and F(n + 1) never carry a nonzero coefficient: x = 0 forces z = 0,
    and x = n forces y = z. Both facts are asserted rather than assumed, so
    an indexing bug fails loudly.
    """
    row = np.zeros(n + 1)
    if x == 0:
        if z != 0:
            raise AssertionError(f"x = 0 must force z = 0, got z = {z}")
    else:
        row[x - 1] += x - z
    if x == n:
        if y != z:
            raise AssertionError(f"x = n must force y = z, got y = {y}, z = {z}")
    else:
        row[x] -= y - z
    row[n] = -w[x]
    return row, -w[y]


def _assemble_full(w: WelfareTable):
    triplets = index_set(w.n)
    rows, rhs = [], []
    for t in triplets:
        row, b = _constraint_row(w.n, w.values, t.x, t.y, t.z)
        rows.append(row)
        rhs.append(b)
    return np.array(rows), np.array(rhs), triplets


def _assemble_relaxed(w: WelfareTable):
    """Constraints W(y) - rho W(x) + min(x, n-y) F(x) - min(y, n-x) F(x+1) <= 0
    for (x, y) in {0..n} x {1..n} plus (n, 0); each pair corresponds to the
    full program's triplet with z = max(0, x + y - n)."""
    n = w.n
    pairs = [(x, y) for x in range(n + 1) for y in range(1, n + 1)]
    pairs.append((n, 0))
    rows, rhs, triplets = [], [], []
    for x, y in sorted(pairs):
        z = max(0, x + y - n)
        row = np.zeros(n + 1)
        coeff_fx = min(x, n - y)
        coeff_fx1 = min(y, n - x)
        if x == 0:
            if coeff_fx != 0:
                raise AssertionError(f"F(0) coefficient must vanish, got {coeff_fx}")
        else:
            row[x - 1] += coeff_fx
        if x == n:
            if coeff_fx1 != 0:
                raise AssertionError(f"F(n+1) coefficient must vanish, got {coeff_fx1}")
        else:
            row[x] -= coeff_fx1
        row[n] = -w.values[x]
        rows.append(row)
        rhs.append(-w.values[y])
        triplets.append(ConstraintTriplet(x, y, z))
    return np.array(rows), np.array(rhs), tuple(triplets)


def _recover_point(G, q, basis):
    columns = G[:, list(basis)]
    if columns.shape[1] == G.shape[0]:
        return np.linalg.solve(columns.T, q[list(basis)])
    solution, *_ = np.linalg.lstsq(columns.T, q[list(basis)], rcond=None)
    return solution


def _solve_program(w: WelfareTable, A, b, triplets) -> LpSolution:
    """Minimize rho over A u <= b with u = (F(1..n), rho) via the dual."""
    n = w.n
    scale = max(1.0, w.values[n])
    feas_tol = FEASIBILITY_TOL * scale
    objective = np.zeros(n + 1)
    objective[n] = 1.0

    G = A.T.copy()
    h = -objective
    q = b
    bland_after = 10 * (n + 1) ** 2
    max_pivots = bland_after + 200 * (n + 1) + 20 * len(triplets) + 5000

    for bland in (False, True):
        result = solve_standard_form(
            G, h, q, bland=bland, bland_after=bland_after, max_pivots=max_pivots
        )
        if result.status == "infeasible":
            # dual infeasible: the original minimization is unbounded
            return LpSolution(None, math.nan, STATUS_UNBOUNDED, ())
        if result.status == "unbounded":
            # dual unbounded below: the original program is infeasible
            return LpSolution(None, math.nan, STATUS_INFEASIBLE, ())
        if result.status != "optimal":
            continue
        try:
            point = _recover_point(G, q, result.basis)
        except np.linalg.LinAlgError:
            continue
        rho = float(point[n])
        slack = A @ point - b
        dual_residual = float(np.abs(G @ result.x - h).max())
        gap = abs(result.objective + rho)
        ok = (
            float(slack.max()) <= feas_tol
            and dual_residual <= feas_tol
            and gap <= DUALITY_TOL * max(1.0, abs(rho))
            and rho >= 1.0 - RHO_FLOOR_TOL
        )
        if not ok:
            continue
        binding = tuple(
            t for t, s in zip(triplets, slack) if s >= -feas_tol
        )
        utility = UtilityTable(n, tuple(float(v) for v in point[:n]))
        return LpSolution(utility, rho, STATUS_OPTIMAL, binding)
    return LpSolution(None, math.nan, STATUS_NUMERICAL_FAILURE, ())


def solve_optimal_mechanism(w: WelfareTable) -> LpSolution:
    """Minimize rho subject to every index-set constraint; 1 / rho is the
    best price of anarchy achievable by any local utility for this welfare."""
    A, b, triplets = _assemble_full(w)
    return _solve_program(w, A, b, triplets)


def solve_relaxed(w: WelfareTable) -> LpSolution:
    """Solve the relaxation that keeps one constraint per (x, y) pair.

    Its constraints are a subset of the full program's, so the relaxed
    optimum never exceeds the full one; the two coincide whenever the full
    optimum's F is nonincreasing.
    """
    A, b, triplets = _assemble_relaxed(w)
    return _solve_program(w, A, b, triplets)


def verify_feasibility(w: WelfareTable, f: UtilityTable, rho: float) -> FeasibilityReport:
    """Evaluate every full-program constraint at (f, rho).

    Returns the maximum violation and its triplet; the pair is feasible when
    the maximum violation is at most FEASIBILITY_TOL * max(1, W(n)).
    """
    if f.n != w.n:
        raise DimensionMismatchError(
            f"utility has n = {f.n}, welfare has n = {w.n}"
        )
    n = w.n
    vals, futil = w.values, f.values
    worst_value = -math.inf
    worst = None
    for t in index_set(n):
        value = vals[t.y] - rho * vals[t.x]
        if t.x >= 1:
            value += (t.x - t.z) * futil[t.x - 1]
        if t.x < n:
            value -= (t.y - t.z) * futil[t.x]
        if value > worst_value:
            worst_value = value
            worst = t
    tolerance = FEASIBILITY_TOL * max(1.0, vals[n])
    return FeasibilityReport(worst_value <= tolerance, worst_value, worst, tolerance)


def min_poa_over_welfares(ws: Sequence[WelfareTable]) -> float:
    """The guarantee over a family: solve each program and take min of 1 / rho."""
    if not ws:
        raise ValidationError("welfare sequence must be nonempty")
    best = math.inf
    for j, w in enumerate(ws):
        solution = solve_optimal_mechanism(w)
        if solution.status != STATUS_OPTIMAL:
            raise SolverError(
                f"solve failed with status {solution.status!r} at index {j}"
            )
        best = min(best, solution.poa)
    return best
