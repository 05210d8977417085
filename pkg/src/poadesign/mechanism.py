"""Construction of local utility functions: the coverage-function recursion,
the curvature-based universal mechanism, and the two baselines."""

from __future__ import annotations

import decimal
import json
import math
from dataclasses import dataclass
from decimal import Decimal

from .errors import ValidationError
from .welfare import CoverageParams, WelfareTable, decompose_concave

# Exact integer arithmetic for beta ** beta / beta! stays cheap up to here;
# beyond, the ratio is accumulated in log space to avoid overflow.
EXACT_FACTORIAL_LIMIT = 20

# poa * rho must round-trip within this.
RECIPROCAL_TOL = 1e-12


@dataclass(frozen=True)
class UtilityTable:
    """A local utility function tabulated on {1..n}.

    Fields:
        n: maximum player count.
        values: n reals with values[x - 1] = F(x) for x = 1..n.
    """

    n: int
    values: tuple

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValidationError(f"n must be a positive integer, got {self.n!r}")
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) != self.n:
            raise ValidationError(
                f"values must have length n = {self.n}, got {len(vals)}"
            )
        for x, v in enumerate(vals, start=1):
            if not math.isfinite(v):
                raise ValidationError(f"F({x}) must be finite, got {v!r}")

    def at(self, x: int) -> float:
        """F(x) for x in 1..n."""
        if not 1 <= x <= self.n:
            raise ValidationError(f"x must lie in 1..{self.n}, got {x!r}")
        return self.values[x - 1]

    def scaled(self, v: float) -> "UtilityTable":
        return UtilityTable(self.n, tuple(v * f for f in self.values))

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "values": list(self.values)})

    @classmethod
    def from_json(cls, text: str) -> "UtilityTable":
        data = json.loads(text)
        try:
            return cls(int(data["n"]), tuple(data["values"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed utility JSON: {exc}") from exc


@dataclass(frozen=True)
class MechanismResult:
    """A designed utility together with its efficiency multiplier rho >= 1
    and the corresponding price of anarchy 1 / rho."""

    utility: UtilityTable
    rho: float
    poa: float

    def __post_init__(self):
        if abs(self.poa * self.rho - 1.0) > RECIPROCAL_TOL:
            raise ValidationError(
                f"poa * rho = {self.poa * self.rho!r} must equal 1"
            )


def rho_closed_form(params: CoverageParams) -> float:
    """The efficiency multiplier (1 - alpha * beta^beta * e^-beta / beta!)^-1.

    The term beta^beta * e^-beta / beta! is at most 1/e, so the denominator
    stays above 1 - 1/e and no division blows up. beta^beta and beta!
    overflow separately for large beta while their ratio stays tame, so the
    ratio is computed in log space beyond small beta.
    """
    alpha, beta = params.alpha, params.beta
    if alpha == 0.0:
        return 1.0
    if beta <= EXACT_FACTORIAL_LIMIT:
        term = alpha * (beta**beta / math.factorial(beta)) * math.exp(-beta)
    else:
        log_ratio = beta * math.log(beta) - beta - math.lgamma(beta + 1)
        term = alpha * math.exp(log_ratio)
    return 1.0 / (1.0 - term)


def _recursion_precision(n: int, beta: int) -> int:
    """Working digits for the utility recursion.

    One step multiplies the incumbent by x / beta, so an input perturbation
    grows by up to (n-1)! / beta^(n-1) across the table. The recursion is
    therefore run with enough guard digits to absorb that amplification and
    still deliver full float accuracy.
    """
    amplification = (math.lgamma(n) - (n - 1) * math.log(beta)) / math.log(10.0)
    return 40 + max(0, math.ceil(amplification))


def coverage_utility(params: CoverageParams, n: int) -> MechanismResult:
    """The recursive utility for a coverage function, with its price of anarchy.

    F(1) = 1 and
    F(x+1) = max{(1/beta) [x F(x) - V(x) rho] + 1, 1 - alpha} for x = 1..n-1,
    where rho is the closed-form multiplier. F never rises, never drops below
    the floor 1 - alpha, and pairs with rho as a feasible point of the
    price-of-anarchy linear program at every n. The recursion amplifies
    rounding error factorially, so it runs in fixed-point decimal arithmetic
    sized by _recursion_precision and only the finished table is rounded.
    """
    if not isinstance(n, int) or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    rho = rho_closed_form(params)
    alpha, beta = params.alpha, params.beta
    with decimal.localcontext() as ctx:
        ctx.prec = _recursion_precision(n, beta)
        alpha_d = Decimal(alpha)
        beta_d = Decimal(beta)
        term = (
            alpha_d
            * Decimal(beta**beta)
            / Decimal(math.factorial(beta))
            * (-beta_d).exp()
        )
        rho_d = 1 / (1 - term)
        floor = 1 - alpha_d
        table = [Decimal(1)]
        for x in range(1, n):
            v = (1 - alpha_d) * x + alpha_d * min(x, beta)
            recursed = (x * table[-1] - v * rho_d) / beta_d + 1
            table.append(max(recursed, floor))
    return MechanismResult(
        UtilityTable(n, tuple(float(v) for v in table)), rho, 1.0 / rho
    )


def universal_utility(w: WelfareTable, c: float) -> UtilityTable:
    """The curvature-c mechanism: F(x) = sum_k eta_k * F_k(x) over the
    coverage decomposition of W.

    Guarantee carried downstream: any game built from tables with curvature
    at most c and these utilities has price of anarchy at least 1 - c/e.
    The k = n basis function is linear on {0..n}, so its optimal utility is
    the constant marginal 1, not the recursion built from the saturating
    closed-form multiplier; c = 0 likewise short-circuits to the linear fast
    path F(x) = W(1).
    """
    n = w.n
    if float(c) == 0.0:
        return UtilityTable(n, tuple(w.values[1] for _ in range(n)))
    decomposition = decompose_concave(w, c)
    values = [0.0] * n
    for k, eta in enumerate(decomposition.coefficients, start=1):
        if eta == 0.0:
            continue
        if k >= n:
            component = [1.0] * n
        else:
            component = coverage_utility(CoverageParams(c, k), n).utility.values
        for i in range(n):
            values[i] += eta * component[i]
    return UtilityTable(n, tuple(values))


def equal_shares_utility(w: WelfareTable) -> UtilityTable:
    """The baseline splitting each resource's welfare equally: F(x) = W(x) / x."""
    return UtilityTable(w.n, tuple(w.values[x] / x for x in range(1, w.n + 1)))


def marginal_contribution_utility(w: WelfareTable) -> UtilityTable:
    """The baseline paying each player its marginal: F(x) = W(x) - W(x-1)."""
    return UtilityTable(
        w.n, tuple(w.values[x] - w.values[x - 1] for x in range(1, w.n + 1))
    )
