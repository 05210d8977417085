"""Welfare functions as finite tables, curvature, coverage basis functions,
and the two decomposition constructions over them.

A welfare function is stored as its values on {0, ..., n}. Every formula in
this package only ever evaluates welfare at integer loads up to the player
count, and tables make validation of monotonicity and concavity exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence, Union

from .errors import (
    CurvatureExceededError,
    DegenerateCurvatureError,
    DegenerateEnvelopeError,
    DimensionMismatchError,
    EnvelopeConditionError,
    ValidationError,
)

# Relative tolerance for monotonicity/concavity validation: tables built from
# floating-point closed forms may violate discrete concavity at machine epsilon.
SHAPE_REL_TOL = 1e-12

# Coefficients in [-COEFFICIENT_TOL, 0) are floating-point cancellation noise
# and are clamped to 0; anything below is an input-contract breach.
COEFFICIENT_TOL = 1e-12

# Absolute tolerance on the reconstruction identity sum(eta_k * basis_k) = W.
RECONSTRUCTION_TOL = 1e-9

# Two envelope marginals closer than this are treated as shared (degenerate).
DEGENERATE_MARGINAL_TOL = 1e-12

# Normalized envelope functions must have value 1 at x = 1 within this.
NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class WelfareTable:
    """A nonnegative, nondecreasing, concave function tabulated on {0..n}.

    Fields:
        n: maximum player count (positive integer).
        values: n + 1 reals with values[x] = W(x); values[0] = 0 and
            values[x] > 0 for x >= 1.
    """

    n: int
    values: tuple

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValidationError(f"n must be a positive integer, got {self.n!r}")
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) != self.n + 1:
            raise ValidationError(
                f"values must have length n + 1 = {self.n + 1}, got {len(vals)}"
            )
        if vals[0] != 0.0:
            raise ValidationError(f"values[0] must be 0, got {vals[0]!r}")
        tol = SHAPE_REL_TOL * max(1.0, max(abs(v) for v in vals))
        for x in range(1, self.n + 1):
            if not vals[x] > 0.0:
                raise ValidationError(f"values[{x}] must be positive, got {vals[x]!r}")
        for x in range(self.n):
            if vals[x + 1] < vals[x] - tol:
                raise ValidationError(f"monotonicity violated at index {x + 1}")
        for x in range(1, self.n):
            # second difference must be <= 0: W(x+1) - W(x) <= W(x) - W(x-1)
            if vals[x + 1] - vals[x] > vals[x] - vals[x - 1] + tol:
                raise ValidationError(f"concavity violated at index {x}")

    @classmethod
    def from_function(cls, n: int, func: Callable[[int], float]) -> "WelfareTable":
        """Tabulate func on {0..n}. func(0) is ignored and pinned to 0."""
        return cls(n, tuple([0.0] + [float(func(x)) for x in range(1, n + 1)]))

    def scaled(self, v: float) -> "WelfareTable":
        """The table v * W for a scalar v > 0."""
        if not v > 0.0:
            raise ValidationError(f"scale factor must be positive, got {v!r}")
        return WelfareTable(self.n, tuple(v * w for w in self.values))

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "values": list(self.values)})

    @classmethod
    def from_json(cls, text: str) -> "WelfareTable":
        data = json.loads(text)
        try:
            return cls(int(data["n"]), tuple(data["values"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed welfare JSON: {exc}") from exc


@dataclass(frozen=True)
class CoverageParams:
    """Parameters (alpha, beta) of the coverage basis function
    V(x) = (1 - alpha) * x + alpha * min(x, beta)."""

    alpha: float
    beta: int

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha must lie in [0, 1], got {self.alpha!r}")
        if not isinstance(self.beta, int) or self.beta < 1:
            raise ValidationError(f"beta must be a positive integer, got {self.beta!r}")


BasisElement = Union[CoverageParams, WelfareTable]


def coverage_value(params: CoverageParams, x: int) -> float:
    """Evaluate the coverage basis function at integer load x >= 0."""
    if not isinstance(x, int) or x < 0:
        raise ValidationError(f"x must be a nonnegative integer, got {x!r}")
    return (1.0 - params.alpha) * x + params.alpha * min(x, params.beta)


def coverage_table(params: CoverageParams, n: int) -> WelfareTable:
    """The coverage basis function tabulated on {0..n}."""
    return WelfareTable(n, tuple(coverage_value(params, x) for x in range(n + 1)))


def _basis_value(element: BasisElement, x: int) -> float:
    if isinstance(element, CoverageParams):
        return coverage_value(element, x)
    return element.values[x]


@dataclass(frozen=True)
class Decomposition:
    """Nonnegative coefficients over a basis of welfare-like functions.

    reconstruct(x) returns scale * sum_k coefficients[k] * basis[k](x); the
    scale factor is 1 for the curvature decomposition and W(1) for the
    envelope decomposition, whose coefficients reconstruct W / W(1).
    """

    coefficients: tuple
    basis: tuple
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if len(self.coefficients) != len(self.basis):
            raise ValidationError(
                f"{len(self.coefficients)} coefficients for {len(self.basis)} basis functions"
            )

    def reconstruct(self, x: int) -> float:
        total = 0.0
        for eta, element in zip(self.coefficients, self.basis):
            total += eta * _basis_value(element, x)
        return self.scale * total


def curvature(w: WelfareTable) -> float:
    """Curvature c = 1 - (W(n) - W(n-1)) / W(1), clamped into [0, 1].

    A linear table has curvature 0; a table that is flat on its last step has
    curvature 1. For n = 1 the lone marginal is W(1) itself, so the result
    is 0.
    """
    if w.n == 1:
        return 0.0
    c = 1.0 - (w.values[w.n] - w.values[w.n - 1]) / w.values[1]
    return min(1.0, max(0.0, c))


def _clamp_coefficients(raw, what: str, error):
    clamped = []
    for k, eta in enumerate(raw, start=1):
        if eta < -COEFFICIENT_TOL:
            raise error(
                f"{what} produced negative coefficient eta_{k} = {eta!r}"
            )
        clamped.append(max(eta, 0.0))
    return tuple(clamped)


def decompose_concave(w: WelfareTable, c: float) -> Decomposition:
    """Write W as a nonnegative combination of coverage functions (c, k), k = 1..n.

    Requires curvature(w) <= c and c > 0. The coefficients are
    eta_1 = [2 W(1) - W(2)] / c, eta_k = [2 W(k) - W(k-1) - W(k+1)] / c for
    k = 2..n-1, and eta_n = W(1) - sum of the others; concavity makes every
    coefficient nonnegative, and the combination reproduces W exactly.

    Table validation admits rounding-level concavity violations; dividing
    such noise by a c that is itself at rounding scale can push a
    coefficient below zero by more than COEFFICIENT_TOL. No nonnegative
    combination reproduces such a table, so that case raises
    CurvatureExceededError rather than returning a broken decomposition.
    """
    c = float(c)
    if c == 0.0:
        raise DegenerateCurvatureError(
            "c = 0 has no coverage decomposition; linear welfare takes the "
            "fast path F(x) = W(1) with every equilibrium optimal"
        )
    if not 0.0 < c <= 1.0:
        raise ValidationError(f"curvature bound must lie in (0, 1], got {c!r}")
    if curvature(w) > c + COEFFICIENT_TOL:
        raise CurvatureExceededError(
            f"table curvature {curvature(w)!r} exceeds bound {c!r}"
        )
    n, vals = w.n, w.values
    if n == 1:
        raw = [vals[1]]
    else:
        raw = [(2.0 * vals[1] - vals[2]) / c]
        for k in range(2, n):
            raw.append((2.0 * vals[k] - vals[k - 1] - vals[k + 1]) / c)
        raw.append(vals[1] - sum(raw))
    coeffs = _clamp_coefficients(raw, "curvature decomposition", CurvatureExceededError)
    basis = tuple(CoverageParams(c, k) for k in range(1, n + 1))
    return Decomposition(coeffs, basis)


@dataclass(frozen=True)
class CandidateEnvelope:
    """An upper/lower envelope pair of normalized welfare functions.

    Both tables are normalized to value 1 at x = 1 and must satisfy the
    pair-only parts of the sandwich conditions: lower marginals never exceed
    upper marginals, and the upper function's second differences never exceed
    the lower function's. Whether a particular welfare function is enclosed
    is a per-instance question answered by check_member.
    """

    w_ub: WelfareTable
    w_lb: WelfareTable

    def __post_init__(self):
        if self.w_ub.n != self.w_lb.n:
            raise DimensionMismatchError(
                f"envelope tables disagree on n: {self.w_ub.n} vs {self.w_lb.n}"
            )
        for name, table in (("w_ub", self.w_ub), ("w_lb", self.w_lb)):
            if abs(table.values[1] - 1.0) > NORMALIZATION_TOL:
                raise ValidationError(
                    f"{name} must be normalized to value 1 at x = 1, got {table.values[1]!r}"
                )
        n = self.w_ub.n
        ub, lb = self.w_ub.values, self.w_lb.values
        for x in range(1, n):
            if lb[x + 1] - lb[x] > ub[x + 1] - ub[x] + DEGENERATE_MARGINAL_TOL:
                raise EnvelopeConditionError(
                    f"lower marginal exceeds upper marginal at step {x}"
                )
        for x in range(2, n):
            # signed second differences: upper bounded above by lower
            d2_ub = ub[x + 1] - 2.0 * ub[x] + ub[x - 1]
            d2_lb = lb[x + 1] - 2.0 * lb[x] + lb[x - 1]
            if d2_ub > d2_lb + DEGENERATE_MARGINAL_TOL:
                raise EnvelopeConditionError(
                    f"second-difference ordering between envelopes fails at x = {x}"
                )

    @property
    def n(self) -> int:
        return self.w_ub.n

    def check_member(self, w: WelfareTable) -> None:
        """Raise unless the supplied table satisfies both sandwich conditions.

        Condition (i): normalized marginals of w lie between the envelope
        marginals for x = 1..n-1. Condition (ii): signed second differences
        of w / W(1) are bounded above by the upper envelope's for x = 2..n-1.
        """
        if w.n != self.n:
            raise DimensionMismatchError(f"table has n = {w.n}, envelope has n = {self.n}")
        n = self.n
        ub, lb, vals = self.w_ub.values, self.w_lb.values, w.values
        scale = vals[1]
        tol = SHAPE_REL_TOL * max(1.0, max(abs(v) for v in vals) / scale)
        for x in range(1, n):
            marginal = (vals[x + 1] - vals[x]) / scale
            if marginal < lb[x + 1] - lb[x] - tol or marginal > ub[x + 1] - ub[x] + tol:
                raise EnvelopeConditionError(
                    f"marginal condition fails at step {x}: {marginal!r} outside "
                    f"[{lb[x + 1] - lb[x]!r}, {ub[x + 1] - ub[x]!r}]"
                )
        for x in range(2, n):
            d2_w = (vals[x + 1] - 2.0 * vals[x] + vals[x - 1]) / scale
            d2_ub = ub[x + 1] - 2.0 * ub[x] + ub[x - 1]
            if d2_w > d2_ub + tol:
                raise EnvelopeConditionError(
                    f"second-difference condition fails at x = {x}"
                )


def build_candidates(env: CandidateEnvelope, n: int) -> tuple:
    """The candidate tables W_k, k = 1..n: upper envelope up to k, then
    continued with the lower envelope's increments.

    W_k(x) = ub(x) for x <= k and ub(k) + lb(x) - lb(k) for x > k, with
    W_k(0) = 0. Each candidate is itself a valid welfare table.
    """
    if not isinstance(n, int) or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    if n > env.n:
        raise DimensionMismatchError(f"requested n = {n} exceeds envelope n = {env.n}")
    ub, lb = env.w_ub.values, env.w_lb.values
    candidates = []
    for k in range(1, n + 1):
        vals = [0.0]
        for x in range(1, n + 1):
            if x <= k:
                vals.append(ub[x])
            else:
                vals.append(ub[k] + lb[x] - lb[k])
        candidates.append(WelfareTable(n, tuple(vals)))
    return tuple(candidates)


def decompose_general(w: WelfareTable, env: CandidateEnvelope) -> Decomposition:
    """Write W / W(1) as a nonnegative combination of the envelope candidates.

    The running sums of the coefficients are fixed by marginal matching:
    through step j they must equal
    [ub(j+1) - ub(j) - (W(j+1) - W(j)) / W(1)] / [ub(j+1) - ub(j) - lb(j+1) + lb(j)],
    which pins each eta_j in turn; eta_n tops the sum up to 1. The returned
    scale factor is W(1), so reconstruct() reproduces W itself.

    The sandwich conditions are the caller's contract; violations surface
    here as a negative coefficient beyond tolerance.
    """
    n = w.n
    if env.n != n:
        raise DimensionMismatchError(f"table has n = {n}, envelope has n = {env.n}")
    ub, lb, vals = env.w_ub.values, env.w_lb.values, w.values
    scale = vals[1]
    raw = []
    for j in range(1, n):
        ub_step = ub[j + 1] - ub[j]
        lb_step = lb[j + 1] - lb[j]
        denom = ub_step - lb_step
        if abs(denom) <= DEGENERATE_MARGINAL_TOL:
            raise DegenerateEnvelopeError(
                f"envelopes share the marginal at step {j}; candidate system is singular"
            )
        w_step = (vals[j + 1] - vals[j]) / scale
        raw.append((ub_step - w_step) / denom - sum(raw))
    raw.append(1.0 - sum(raw))
    coeffs = _clamp_coefficients(raw, "envelope decomposition", EnvelopeConditionError)
    return Decomposition(coeffs, build_candidates(env, n), scale=scale)
