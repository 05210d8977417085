"""Round-robin best-response dynamics with convergence detection.

Player i = ((t - 1) mod n) + 1 acts at step t. A trajectory converges at
the first step that completes n consecutive no-op responses: a full silent
round certifies that no player can gain more than the Nash deadband by a
unilateral move. After convergence the remaining recorded states simply
repeat the equilibrium.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import NotConvergedError, ValidationError
from .game import (
    DEFAULT_ENUMERATION_BUDGET,
    Allocation,
    GameInstance,
    _compiled,
    _loads,
    _require_valid,
    _utility_at_loads,
    exhaustive_optimum,
    total_welfare,
)

# An alternative action must beat the incumbent by more than this for the
# responder to move; matches the Nash deadband in the game engine.
RESPONSE_TIE_TOL = 1e-12


@dataclass(frozen=True)
class Trajectory:
    """States a^0..a^T, the first convergence step, and per-step welfare."""

    states: tuple
    converged_at: Optional[int]
    welfare_series: tuple

    def __post_init__(self):
        if len(self.states) != len(self.welfare_series):
            raise ValidationError(
                f"{len(self.states)} states but "
                f"{len(self.welfare_series)} welfare entries"
            )

    @property
    def final(self) -> Allocation:
        return self.states[-1]


def best_response(g: GameInstance, a: Allocation, i: int) -> Allocation:
    """Replace player i's action with a utility-maximizing response.

    The current action is kept whenever it comes within RESPONSE_TIE_TOL of
    the best alternative; otherwise the lowest action index attaining the
    maximum (within the same tolerance) wins. Keeping the incumbent on ties
    means every actual move strictly improves the mover's utility.
    """
    _require_valid(g, a)
    if not 1 <= i <= g.n_players:
        raise ValidationError(f"player must be in 1..{g.n_players}, got {i}")
    c = _compiled(g)
    masks = c["masks"][i - 1]
    current_index = a.choice[i - 1]
    without = _loads(g, a) - masks[current_index]
    utilities = [
        _utility_at_loads(g, masks[k], without + masks[k])
        for k in range(masks.shape[0])
    ]
    best = max(utilities)
    if utilities[current_index] >= best - RESPONSE_TIE_TOL:
        return a
    chosen = next(
        k for k, u in enumerate(utilities) if u >= best - RESPONSE_TIE_TOL
    )
    choice = list(a.choice)
    choice[i - 1] = chosen
    return Allocation(tuple(choice))


def run_round_robin(g: GameInstance, a0: Allocation, T: int) -> Trajectory:
    """Iterate best responses for steps t = 1..T from the start state a0.

    Convergence is declared at the first step completing n consecutive
    silent responses; iteration then stops and the trajectory is padded with
    the equilibrium state out to length T + 1.
    """
    if T < 1:
        raise ValidationError(f"T must be at least 1, got {T}")
    _require_valid(g, a0)
    n = g.n_players
    states = [a0]
    welfare = [total_welfare(g, a0)]
    a = a0
    silent = 0
    converged_at = None
    for t in range(1, T + 1):
        i = (t - 1) % n + 1
        b = best_response(g, a, i)
        if b.choice == a.choice:
            silent += 1
        else:
            silent = 0
            a = b
        states.append(a)
        welfare.append(total_welfare(g, a))
        if silent >= n:
            converged_at = t
            break
    if converged_at is not None:
        while len(states) < T + 1:
            states.append(a)
            welfare.append(welfare[-1])
    return Trajectory(tuple(states), converged_at, tuple(welfare))


def equilibrium_efficiency(
    g: GameInstance,
    traj: Trajectory,
    *,
    optimum: Optional[Allocation] = None,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> float:
    """Welfare of the settled state divided by the best achievable welfare.

    The trajectory must have converged; the statistic is defined at
    equilibrium. Pass a precomputed optimum allocation to skip the
    exhaustive search, e.g. when scoring many trajectories of one game.
    """
    if traj.converged_at is None:
        raise NotConvergedError(
            "trajectory did not converge; efficiency is defined at equilibrium"
        )
    if optimum is None:
        optimum, _ = exhaustive_optimum(g, budget)
    ratio = total_welfare(g, traj.final) / total_welfare(g, optimum)
    if ratio > 1.0 + 1e-9:
        raise AssertionError(
            f"efficiency {ratio} exceeds 1; the supplied optimum is not optimal"
        )
    return min(ratio, 1.0)
