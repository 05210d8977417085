"""Finite resource-allocation game engine.

Evaluates welfare and utilities, verifies pure Nash equilibria, finds the
exhaustive optimum, computes the exact pure-Nash price of anarchy, and
exposes the potential function. Enumeration is vectorized over chunks of
allocation indices so that desk-scale instances (budget 2^22) finish in
seconds; results are bit-identical regardless of chunking because ties are
always resolved toward the lexicographically first allocation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    BudgetExceededError,
    DegenerateGameError,
    DimensionMismatchError,
    UnsupportedModeError,
    ValidationError,
)
from .mechanism import UtilityTable
from .welfare import WelfareTable

# A unilateral deviation must improve utility by more than this to
# disqualify an equilibrium; equal-within-deadband alternatives do not.
NASH_IMPROVEMENT_TOL = 1e-12

# Default cap on the number of allocations an exhaustive pass may visit.
DEFAULT_ENUMERATION_BUDGET = 1 << 22

# Allocations are enumerated in blocks of this many rows.
CHUNK_ROWS = 1 << 16

MODE_LOCAL = "local"
MODE_IDENTICAL_INTEREST = "identical_interest"


@dataclass(frozen=True)
class Allocation:
    """One action index per player, 0-based into that player's action list."""

    choice: tuple

    def __post_init__(self):
        choice = tuple(int(c) for c in self.choice)
        if any(c < 0 for c in choice):
            raise ValidationError(f"action indices must be nonnegative, got {choice}")
        object.__setattr__(self, "choice", choice)


@dataclass(frozen=True)
class NashResult:
    """Equilibrium verdict with a witnessing deviation when it fails."""

    equilibrium: bool
    player: Optional[int] = None
    action: Optional[int] = None

    def __bool__(self) -> bool:
        return self.equilibrium


@dataclass(frozen=True)
class ExactPoa:
    """Exhaustive price-of-anarchy summary for one game."""

    poa: float
    worst: Allocation
    nash_count: int
    optimum: Allocation
    optimum_welfare: float


@dataclass(frozen=True)
class GameInstance:
    """A resource-allocation game.

    Players are 1..n with n = len(actions). Each player's entry in
    ``actions`` is a nonempty tuple of actions, each action a tuple of
    resource ids drawn from ``resources`` (the empty action is allowed).
    ``welfare`` holds one table per resource, all with this game's n. In
    local mode ``utilities`` holds one table per resource; in
    identical-interest mode every player's utility is the total welfare and
    ``utilities`` must be omitted.
    """

    resources: tuple
    actions: tuple
    welfare: tuple
    utility_mode: str = MODE_LOCAL
    utilities: Optional[tuple] = None

    def __post_init__(self):
        resources = tuple(self.resources)
        if len(set(resources)) != len(resources):
            raise ValidationError("resource ids must be distinct")
        if not self.actions:
            raise ValidationError("game must have at least one player")
        known = set(resources)
        actions = []
        for i, player_actions in enumerate(self.actions, start=1):
            normalized = tuple(tuple(a) for a in player_actions)
            if not normalized:
                raise ValidationError(f"player {i} has no actions")
            for a in normalized:
                if len(set(a)) != len(a):
                    raise ValidationError(
                        f"player {i} has an action with repeated resources: {a}"
                    )
                unknown = [r for r in a if r not in known]
                if unknown:
                    raise ValidationError(
                        f"player {i} references undeclared resources {unknown}"
                    )
            actions.append(normalized)
        n = len(actions)
        welfare = tuple(self.welfare)
        if len(welfare) != len(resources):
            raise DimensionMismatchError(
                f"{len(welfare)} welfare tables for {len(resources)} resources"
            )
        for r, w in zip(resources, welfare):
            if not isinstance(w, WelfareTable):
                raise ValidationError(f"welfare for {r!r} is not a WelfareTable")
            if w.n != n:
                raise DimensionMismatchError(
                    f"welfare for {r!r} has n = {w.n}, game has {n} players"
                )
        if self.utility_mode == MODE_LOCAL:
            if self.utilities is None:
                raise ValidationError("local mode requires utility tables")
            utilities = tuple(self.utilities)
            if len(utilities) != len(resources):
                raise DimensionMismatchError(
                    f"{len(utilities)} utility tables for {len(resources)} resources"
                )
            for r, f in zip(resources, utilities):
                if not isinstance(f, UtilityTable):
                    raise ValidationError(f"utility for {r!r} is not a UtilityTable")
                if f.n != n:
                    raise DimensionMismatchError(
                        f"utility for {r!r} has n = {f.n}, game has {n} players"
                    )
        elif self.utility_mode == MODE_IDENTICAL_INTEREST:
            if self.utilities is not None:
                raise ValidationError(
                    "identical-interest mode takes no utility tables"
                )
            utilities = None
        else:
            raise ValidationError(
                f"utility_mode must be {MODE_LOCAL!r} or {MODE_IDENTICAL_INTEREST!r},"
                f" got {self.utility_mode!r}"
            )
        object.__setattr__(self, "resources", resources)
        object.__setattr__(self, "actions", tuple(actions))
        object.__setattr__(self, "welfare", welfare)
        object.__setattr__(self, "utilities", utilities)

    @property
    def n_players(self) -> int:
        return len(self.actions)

    @property
    def players(self) -> tuple:
        return tuple(range(1, len(self.actions) + 1))

    def action_counts(self) -> tuple:
        return tuple(len(pa) for pa in self.actions)

    def to_json(self) -> dict:
        doc = {
            "players": self.n_players,
            "resources": list(self.resources),
            "actions": [[list(a) for a in pa] for pa in self.actions],
            "welfare": [{"n": w.n, "values": list(w.values)} for w in self.welfare],
            "utility_mode": self.utility_mode,
        }
        if self.utilities is not None:
            doc["utilities"] = [
                {"n": f.n, "values": list(f.values)} for f in self.utilities
            ]
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "GameInstance":
        try:
            resources = tuple(doc["resources"])
            actions = tuple(
                tuple(tuple(a) for a in player_actions)
                for player_actions in doc["actions"]
            )
            welfare = tuple(
                WelfareTable(int(w["n"]), tuple(w["values"])) for w in doc["welfare"]
            )
            mode = doc.get("utility_mode", MODE_LOCAL)
            utilities = None
            if doc.get("utilities") is not None:
                utilities = tuple(
                    UtilityTable(int(f["n"]), tuple(f["values"]))
                    for f in doc["utilities"]
                )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed game document: {exc}") from exc
        game = cls(resources, actions, welfare, mode, utilities)
        declared = doc.get("players")
        if declared is not None and declared != game.n_players:
            raise DimensionMismatchError(
                f"document declares {declared} players but lists "
                f"{game.n_players} action sets"
            )
        return game


def _compiled(g: GameInstance) -> dict:
    """Numpy views of the game, built once per instance and cached on it."""
    cache = getattr(g, "_numpy_cache", None)
    if cache is not None:
        return cache
    rindex = {r: j for j, r in enumerate(g.resources)}
    n, nres = g.n_players, len(g.resources)
    masks = []
    for player_actions in g.actions:
        m = np.zeros((len(player_actions), nres), dtype=np.int64)
        for k, a in enumerate(player_actions):
            for r in a:
                m[k, rindex[r]] = 1
        masks.append(m)
    wm = np.array([w.values for w in g.welfare], dtype=float)
    cache = {"rindex": rindex, "masks": masks, "wm": wm}
    if g.utility_mode == MODE_LOCAL:
        fm = np.zeros((nres, n + 1))
        for j, f in enumerate(g.utilities):
            fm[j, 1:] = f.values
        cache["fm"] = fm
        cache["cumf"] = np.cumsum(fm, axis=1)
    object.__setattr__(g, "_numpy_cache", cache)
    return cache


def _require_valid(g: GameInstance, a: Allocation) -> None:
    if len(a.choice) != g.n_players:
        raise DimensionMismatchError(
            f"allocation has {len(a.choice)} entries for {g.n_players} players"
        )
    for i, (c, player_actions) in enumerate(zip(a.choice, g.actions), start=1):
        if c >= len(player_actions):
            raise ValidationError(
                f"player {i} action index {c} out of range "
                f"(has {len(player_actions)} actions)"
            )


def _loads(g: GameInstance, a: Allocation) -> np.ndarray:
    c = _compiled(g)
    loads = np.zeros(len(g.resources), dtype=np.int64)
    for i, k in enumerate(a.choice):
        loads += c["masks"][i][k]
    return loads


def load_count(g: GameInstance, a: Allocation, r) -> int:
    """Number of players whose chosen action contains resource r."""
    _require_valid(g, a)
    c = _compiled(g)
    if r not in c["rindex"]:
        raise ValidationError(f"unknown resource {r!r}")
    return int(_loads(g, a)[c["rindex"][r]])


def total_welfare(g: GameInstance, a: Allocation) -> float:
    """W(a): sum of each resource's welfare at its load."""
    _require_valid(g, a)
    c = _compiled(g)
    loads = _loads(g, a)
    return float(c["wm"][np.arange(len(g.resources)), loads].sum())


def player_utility(g: GameInstance, a: Allocation, i: int) -> float:
    """U_i(a): the sum of F_r at the load over resources in player i's
    action, or the total welfare in identical-interest mode."""
    _require_valid(g, a)
    if not 1 <= i <= g.n_players:
        raise ValidationError(f"player must be in 1..{g.n_players}, got {i}")
    if g.utility_mode == MODE_IDENTICAL_INTEREST:
        return total_welfare(g, a)
    c = _compiled(g)
    loads = _loads(g, a)
    mask = c["masks"][i - 1][a.choice[i - 1]]
    return float((mask * c["fm"][np.arange(len(g.resources)), loads]).sum())


def _utility_at_loads(g: GameInstance, mask: np.ndarray, loads: np.ndarray) -> float:
    c = _compiled(g)
    table = c["wm"] if g.utility_mode == MODE_IDENTICAL_INTEREST else c["fm"]
    gathered = table[np.arange(len(g.resources)), loads]
    if g.utility_mode == MODE_IDENTICAL_INTEREST:
        return float(gathered.sum())
    return float((mask * gathered).sum())


def is_nash(g: GameInstance, a: Allocation) -> NashResult:
    """Check Nash stability; on failure report the first improving deviation
    in (player, action-index) order.

    A deviation must gain strictly more than NASH_IMPROVEMENT_TOL to count.
    """
    _require_valid(g, a)
    c = _compiled(g)
    base_loads = _loads(g, a)
    for i in range(g.n_players):
        masks = c["masks"][i]
        cur_mask = masks[a.choice[i]]
        without = base_loads - cur_mask
        current = _utility_at_loads(g, cur_mask, base_loads)
        for k in range(masks.shape[0]):
            if k == a.choice[i]:
                continue
            candidate = _utility_at_loads(g, masks[k], without + masks[k])
            if candidate > current + NASH_IMPROVEMENT_TOL:
                return NashResult(False, i + 1, k)
    return NashResult(True)


def potential(g: GameInstance, a: Allocation) -> float:
    """Rosenthal potential Phi(a) = sum_r sum_{j <= load_r} F_r(j).

    Any unilateral deviation changes a player's utility and Phi by the same
    amount; that identity is what makes best-response dynamics converge.
    """
    if g.utility_mode != MODE_LOCAL:
        raise UnsupportedModeError(
            "potential is defined for local utilities; in identical-interest "
            "mode the welfare itself plays that role"
        )
    _require_valid(g, a)
    c = _compiled(g)
    loads = _loads(g, a)
    return float(c["cumf"][np.arange(len(g.resources)), loads].sum())


def _check_budget(g: GameInstance, budget: int) -> int:
    total = 1
    for count in g.action_counts():
        total *= count
    if total > budget:
        raise BudgetExceededError(
            f"{total} allocations exceed the enumeration budget {budget}; "
            "raise the budget argument to override"
        )
    return total


def _iter_chunks(g: GameInstance, total: int):
    """Yield (digits, loads, welfare) for blocks of allocation indices.

    Linear index 0..total-1 maps to choices in row-major order with player 1
    as the most significant digit, so ascending index is ascending
    lexicographic order of choice tuples. digits is a (players, rows) array;
    loads is (rows, resources); welfare is (rows,).
    """
    c = _compiled(g)
    counts = g.action_counts()
    n, nres = g.n_players, len(g.resources)
    rix = np.arange(nres)
    for start in range(0, total, CHUNK_ROWS):
        idx = np.arange(start, min(start + CHUNK_ROWS, total), dtype=np.int64)
        rows = idx.size
        digits = np.zeros((n, rows), dtype=np.int64)
        rem = idx.copy()
        for i in range(n - 1, -1, -1):
            digits[i] = rem % counts[i]
            rem //= counts[i]
        loads = np.zeros((rows, nres), dtype=np.int64)
        for i in range(n):
            loads += c["masks"][i][digits[i]]
        welfare = c["wm"][rix, loads].sum(axis=1)
        yield digits, loads, welfare


def exhaustive_optimum(
    g: GameInstance, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> tuple:
    """Welfare-maximizing allocation by full enumeration.

    Ties go to the lexicographically first allocation. Raises when the
    product of action-set sizes exceeds the budget, or when no allocation
    covers anything (the optimum must have positive welfare).
    """
    total = _check_budget(g, budget)
    best_welfare = -np.inf
    best_choice = None
    for digits, _, welfare in _iter_chunks(g, total):
        j = int(np.argmax(welfare))
        if welfare[j] > best_welfare:
            best_welfare = float(welfare[j])
            best_choice = tuple(int(digits[i, j]) for i in range(g.n_players))
    if best_welfare <= 0.0:
        raise DegenerateGameError(
            "every allocation has zero welfare; the game covers nothing"
        )
    return Allocation(best_choice), best_welfare


def exact_poa(g: GameInstance, budget: int = DEFAULT_ENUMERATION_BUDGET) -> ExactPoa:
    """Exact pure-Nash price of anarchy by full enumeration.

    Enumerates every allocation once, tracking the welfare maximum and the
    minimum-welfare pure Nash equilibrium (both with lexicographic-first
    tie-breaking), and returns min NE welfare / max welfare.
    """
    total = _check_budget(g, budget)
    c = _compiled(g)
    counts = g.action_counts()
    n, nres = g.n_players, len(g.resources)
    rix = np.arange(nres)
    identical = g.utility_mode == MODE_IDENTICAL_INTEREST
    table = c["wm"] if identical else c["fm"]

    best_welfare = -np.inf
    best_choice = None
    worst_ne_welfare = np.inf
    worst_ne_choice = None
    nash_count = 0

    for digits, loads, welfare in _iter_chunks(g, total):
        j = int(np.argmax(welfare))
        if welfare[j] > best_welfare:
            best_welfare = float(welfare[j])
            best_choice = tuple(int(digits[i, j]) for i in range(n))

        rows = welfare.size
        nash_mask = np.ones(rows, dtype=bool)
        for i in range(n):
            masks = c["masks"][i]
            cur_mask = masks[digits[i]]
            without = loads - cur_mask
            if identical:
                current = welfare
            else:
                current = (cur_mask * table[rix, loads]).sum(axis=1)
            for k in range(counts[i]):
                moved = digits[i] != k
                if not moved.any():
                    continue
                dev_loads = without + masks[k]
                if identical:
                    candidate = table[rix, dev_loads].sum(axis=1)
                else:
                    candidate = (masks[k] * table[rix, dev_loads]).sum(axis=1)
                improving = moved & (candidate > current + NASH_IMPROVEMENT_TOL)
                nash_mask &= ~improving
        ne_rows = np.nonzero(nash_mask)[0]
        nash_count += int(ne_rows.size)
        if ne_rows.size:
            local = ne_rows[int(np.argmin(welfare[ne_rows]))]
            if welfare[local] < worst_ne_welfare:
                worst_ne_welfare = float(welfare[local])
                worst_ne_choice = tuple(int(digits[i, local]) for i in range(n))

    if best_welfare <= 0.0:
        raise DegenerateGameError(
            "every allocation has zero welfare; the game covers nothing"
        )
    if nash_count == 0:
        raise AssertionError(
            "no pure Nash equilibrium found; these games always admit one"
        )
    return ExactPoa(
        poa=worst_ne_welfare / best_welfare,
        worst=Allocation(worst_ne_choice),
        nash_count=nash_count,
        optimum=Allocation(best_choice),
        optimum_welfare=best_welfare,
    )
