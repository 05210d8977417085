"""Vehicle-target simulation study: instance generation with deterministic
seeding, the Monte Carlo efficiency harness, box-plot statistics, and the
price-of-anarchy sweep over coverage probabilities.

Every random draw flows from (master_seed, instance index[, stream]) through
numpy SeedSequence spawn keys, so instance i is bit-identical no matter the
execution order, worker count, or which subset of instances is run.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dynamics import equilibrium_efficiency, run_round_robin
from .errors import SolverError, ValidationError
from .game import (
    MODE_IDENTICAL_INTEREST,
    MODE_LOCAL,
    Allocation,
    GameInstance,
    exhaustive_optimum,
)
from .lp import STATUS_OPTIMAL, solve_optimal_mechanism, verify_feasibility
from .mechanism import equal_shares_utility, universal_utility
from .welfare import WelfareTable

# The universal mechanism's guarantee at full curvature.
UNIVERSAL_BOUND = 1.0 - 1.0 / math.e

# The certified price of anarchy returned by the sweep is bracketed to
# within this.
BISECTION_TOL = 1e-9

MECH_UNIVERSAL = "universal"
MECH_IDENTICAL_INTEREST = "identical_interest"
MECH_EQUAL_SHARES = "equal_shares"
MECHANISM_TAGS = (MECH_UNIVERSAL, MECH_IDENTICAL_INTEREST, MECH_EQUAL_SHARES)

# Substream indices for starting allocations; 0 is the shared stream used
# when all mechanisms start from the same allocation.
_START_STREAMS = {MECH_UNIVERSAL: 1, MECH_IDENTICAL_INTEREST: 2, MECH_EQUAL_SHARES: 3}
_SHARED_STREAM = 0


@dataclass(frozen=True)
class VehicleTargetConfig:
    """Parameters of the simulation study.

    n_vehicles vehicles each pick between two uniformly drawn singleton
    targets out of n_vehicles + 1; target t is worth v_t, drawn from
    value_range, and detects with probability p per vehicle, so its welfare
    at load x is v_t (1 - (1 - p)^x).
    """

    n_vehicles: int = 10
    p: float = 0.5
    value_range: tuple = (0.0, 1.0)
    master_seed: int = 0
    instances: int = 1000
    iterations: int = 100
    resample_duplicate_targets: bool = False
    shared_starts: bool = False

    def __post_init__(self):
        if not isinstance(self.n_vehicles, int) or self.n_vehicles < 1:
            raise ValidationError(
                f"n_vehicles must be a positive integer, got {self.n_vehicles!r}"
            )
        if not 0.0 < self.p <= 1.0:
            raise ValidationError(f"p must lie in (0, 1], got {self.p!r}")
        lo, hi = (float(v) for v in self.value_range)
        if not (0.0 <= lo < hi) or not math.isfinite(hi):
            raise ValidationError(
                f"value_range must satisfy 0 <= lo < hi, got {self.value_range!r}"
            )
        object.__setattr__(self, "value_range", (lo, hi))
        if not isinstance(self.master_seed, int) or self.master_seed < 0:
            raise ValidationError(
                f"master_seed must be a nonnegative integer, got {self.master_seed!r}"
            )
        for name in ("instances", "iterations"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ValidationError(f"{name} must be a positive integer, got {v!r}")

    @property
    def n_targets(self) -> int:
        return self.n_vehicles + 1


@dataclass(frozen=True)
class BoxStats:
    """Five-number summary of a batch of efficiency ratios."""

    min: float
    q25: float
    median: float
    q75: float
    max: float

    def __post_init__(self):
        values = (self.min, self.q25, self.median, self.q75, self.max)
        for v in values:
            if not 0.0 < v <= 1.0:
                raise ValidationError(f"box statistics must lie in (0, 1], got {v!r}")
        if not (self.min <= self.q25 <= self.median <= self.q75 <= self.max):
            raise ValidationError(f"box statistics out of order: {values}")

    def as_dict(self) -> dict:
        return {
            "min": self.min,
            "q25": self.q25,
            "median": self.median,
            "q75": self.q75,
            "max": self.max,
        }


@dataclass(frozen=True)
class SweepPoint:
    """One abscissa of the price-of-anarchy sweep."""

    p: float
    optimal: float
    universal: float
    bound: float


@dataclass(frozen=True)
class MonteCarloResult:
    """Per-mechanism efficiency ratios in instance order, plus any
    (instance index, mechanism) pairs whose dynamics failed to converge."""

    ratios: dict
    failures: tuple


def _instance_rng(cfg: VehicleTargetConfig, index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(cfg.master_seed, spawn_key=(index,))
    )


def _start_rng(cfg: VehicleTargetConfig, index: int, tag: str) -> np.random.Generator:
    stream = _SHARED_STREAM if cfg.shared_starts else _START_STREAMS[tag]
    return np.random.default_rng(
        np.random.SeedSequence(cfg.master_seed, spawn_key=(index, stream))
    )


def generate_instance(cfg: VehicleTargetConfig, index: int) -> GameInstance:
    """Draw instance `index`: target values first, then each vehicle's pair
    of candidate targets.

    Target values land in the half-open interval (lo, hi] so every welfare
    table is strictly positive. A vehicle that draws the same target twice
    keeps a single action unless the config asks for resampling. The
    returned game is in identical-interest mode; apply_mechanism swaps in
    designed utilities.
    """
    if not 0 <= index < cfg.instances:
        raise ValidationError(
            f"index must lie in 0..{cfg.instances - 1}, got {index}"
        )
    rng = _instance_rng(cfg, index)
    n, m = cfg.n_vehicles, cfg.n_targets
    lo, hi = cfg.value_range
    values = hi - (hi - lo) * rng.random(m)
    actions = []
    for _ in range(n):
        j, k = (int(t) for t in rng.integers(0, m, size=2))
        while cfg.resample_duplicate_targets and j == k:
            j, k = (int(t) for t in rng.integers(0, m, size=2))
        actions.append(((j,),) if j == k else ((j,), (k,)))
    miss = 1.0 - cfg.p
    welfare = tuple(
        WelfareTable(
            n, tuple(values[t] * (1.0 - miss**x) for x in range(n + 1))
        )
        for t in range(m)
    )
    return GameInstance(
        tuple(range(m)), tuple(actions), welfare, MODE_IDENTICAL_INTEREST
    )


def apply_mechanism(base: GameInstance, tag: str) -> GameInstance:
    """The same game under one of the study's three utility designs."""
    if tag == MECH_IDENTICAL_INTEREST:
        if base.utility_mode == MODE_IDENTICAL_INTEREST:
            return base
        return GameInstance(
            base.resources, base.actions, base.welfare, MODE_IDENTICAL_INTEREST
        )
    if tag == MECH_UNIVERSAL:
        tables = tuple(universal_utility(w, 1.0) for w in base.welfare)
    elif tag == MECH_EQUAL_SHARES:
        tables = tuple(equal_shares_utility(w) for w in base.welfare)
    else:
        raise ValidationError(
            f"mechanism must be one of {MECHANISM_TAGS}, got {tag!r}"
        )
    return GameInstance(base.resources, base.actions, base.welfare, MODE_LOCAL, tables)


def starting_allocation(
    cfg: VehicleTargetConfig, g: GameInstance, index: int, tag: str
) -> Allocation:
    """Seeded-random start: one uniformly chosen action per player."""
    rng = _start_rng(cfg, index, tag)
    return Allocation(
        tuple(int(rng.integers(len(pa))) for pa in g.actions)
    )


def _instance_ratios(cfg: VehicleTargetConfig, index: int, mechanisms) -> dict:
    base = generate_instance(cfg, index)
    optimum, _ = exhaustive_optimum(base)
    out = {}
    for tag in mechanisms:
        g = apply_mechanism(base, tag)
        a0 = starting_allocation(cfg, g, index, tag)
        traj = run_round_robin(g, a0, cfg.iterations)
        if traj.converged_at is None:
            out[tag] = None
        else:
            out[tag] = equilibrium_efficiency(g, traj, optimum=optimum)
    return out


def _instance_worker(args):
    cfg, index, mechanisms = args
    return index, _instance_ratios(cfg, index, mechanisms)


def run_monte_carlo(
    cfg: VehicleTargetConfig,
    mechanisms: Sequence[str] = MECHANISM_TAGS,
    *,
    workers: Optional[int] = None,
) -> MonteCarloResult:
    """Efficiency ratios for every (instance, mechanism) pair.

    Each instance's exhaustive optimum is computed once and shared across
    mechanisms. Instances are independent, so worker processes may split
    them; results are reassembled in instance order and are identical to a
    serial run. Non-converged trajectories (none expected) are dropped from
    the ratio lists and reported in failures.
    """
    mechanisms = tuple(mechanisms)
    if not mechanisms:
        raise ValidationError("at least one mechanism is required")
    for tag in mechanisms:
        if tag not in MECHANISM_TAGS:
            raise ValidationError(
                f"mechanism must be one of {MECHANISM_TAGS}, got {tag!r}"
            )
    by_index: list = [None] * cfg.instances
    if workers is not None and workers > 1:
        tasks = [(cfg, i, mechanisms) for i in range(cfg.instances)]
        chunk = max(1, cfg.instances // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for index, result in pool.map(_instance_worker, tasks, chunksize=chunk):
                by_index[index] = result
    else:
        for i in range(cfg.instances):
            by_index[i] = _instance_ratios(cfg, i, mechanisms)
    ratios = {tag: [] for tag in mechanisms}
    failures = []
    for i, result in enumerate(by_index):
        for tag in mechanisms:
            value = result[tag]
            if value is None:
                failures.append((i, tag))
            else:
                ratios[tag].append(value)
    return MonteCarloResult(
        {tag: tuple(r) for tag, r in ratios.items()}, tuple(failures)
    )


def box_stats(ratios: Sequence[float]) -> BoxStats:
    """Five-number summary: exact min and max, quartiles and median by
    linear interpolation between order statistics."""
    if len(ratios) == 0:
        raise ValidationError("cannot summarize an empty batch of ratios")
    arr = np.asarray(ratios, dtype=float)
    q25, median, q75 = (float(v) for v in np.percentile(arr, (25, 50, 75)))
    return BoxStats(float(arr.min()), q25, median, q75, float(arr.max()))


def _certified_universal_poa(w: WelfareTable, utility) -> float:
    """Largest 1/rho (to BISECTION_TOL) at which the utility passes the
    full-program feasibility check, found by bisection from the guarantee."""

    def feasible(poa: float) -> bool:
        return verify_feasibility(w, utility, 1.0 / poa).feasible

    if feasible(1.0):
        return 1.0
    lo, hi = UNIVERSAL_BOUND, 1.0
    if not feasible(lo):
        raise AssertionError(
            "universal utility infeasible at its guaranteed price of anarchy"
        )
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def figure2_sweep(p_grid: Sequence[float], n: int) -> tuple:
    """Optimal and universal prices of anarchy over a grid of detection
    probabilities, against the 1 - 1/e floor.

    For each p > 0 the welfare is W(x) = 1 - (1-p)^x on n players: the
    optimal value is 1/rho from the full program, and the universal value is
    the certified feasibility bisection for the curvature-1 utility (capped
    by the optimal value, which no fixed mechanism can beat; the cap only
    trims certificate-tolerance excess). p = 0 is the linear fast path where
    both mechanisms are exactly optimal.
    """
    points = []
    for p in p_grid:
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"p must lie in [0, 1], got {p!r}")
        if p == 0.0:
            points.append(SweepPoint(0.0, 1.0, 1.0, UNIVERSAL_BOUND))
            continue
        w = WelfareTable.from_function(n, lambda x: 1.0 - (1.0 - p) ** x)
        solution = solve_optimal_mechanism(w)
        if solution.status != STATUS_OPTIMAL:
            raise SolverError(
                f"optimal-mechanism solve failed with status "
                f"{solution.status!r} at p = {p}"
            )
        optimal = solution.poa
        universal = min(
            _certified_universal_poa(w, universal_utility(w, 1.0)), optimal
        )
        points.append(SweepPoint(p, optimal, universal, UNIVERSAL_BOUND))
    return tuple(points)
