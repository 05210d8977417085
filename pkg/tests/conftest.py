"""Shared builders for the test suite: random concave tables, random games,
and the small hand-analyzed covering games reused across modules."""

import numpy as np

from poadesign.game import GameInstance
from poadesign.mechanism import (
    equal_shares_utility,
    marginal_contribution_utility,
    universal_utility,
)
from poadesign.welfare import WelfareTable

# Smallest marginal a random table may take; keeps W(1) well above zero and
# utility gaps far from the Nash deadband.
MIN_MARGINAL = 0.05


def random_concave_table(rng, n, lo=MIN_MARGINAL, hi=1.0):
    """A valid welfare table with n i.i.d. marginals sorted into concavity."""
    marginals = np.sort(rng.uniform(lo, hi, size=n))[::-1]
    return WelfareTable(n, tuple(np.concatenate(([0.0], np.cumsum(marginals)))))


def _utility_for(tag, w):
    if tag == "equal_shares":
        return equal_shares_utility(w)
    if tag == "marginal":
        return marginal_contribution_utility(w)
    if tag == "universal":
        return universal_utility(w, 1.0)
    raise ValueError(tag)


def random_game(rng, max_players=4, max_actions=3, max_resources=3, tag=None):
    """A random game; the utility design rotates unless pinned by tag.

    Tags name the three local-mode mechanisms plus "identical". The first
    player always has a nonempty first action so the game is never
    degenerate; other actions may be empty or repeated.
    """
    n = int(rng.integers(2, max_players + 1))
    n_res = int(rng.integers(2, max_resources + 1))
    resources = tuple(range(n_res))
    actions = []
    for i in range(n):
        count = int(rng.integers(1, max_actions + 1))
        player = []
        for k in range(count):
            low = 1 if i == 0 and k == 0 else 0
            size = int(rng.integers(low, n_res + 1))
            picked = rng.choice(n_res, size=size, replace=False)
            player.append(tuple(int(r) for r in sorted(picked)))
        actions.append(tuple(player))
    welfare = tuple(random_concave_table(rng, n) for _ in range(n_res))
    if tag is None:
        tag = ("equal_shares", "marginal", "universal")[int(rng.integers(3))]
    if tag == "identical":
        return GameInstance(
            resources, tuple(actions), welfare, "identical_interest"
        )
    utilities = tuple(_utility_for(tag, w) for w in welfare)
    return GameInstance(resources, tuple(actions), welfare, "local", utilities)


def covering_table(n):
    """W(x) = min(x, 1) on {0..n}."""
    return WelfareTable(n, tuple(float(min(x, 1)) for x in range(n + 1)))


def anti_coordination_game():
    """Two players, two unit-value covering resources, equal shares.

    Each player picks one resource. Splitting earns each F(1) = 1; stacking
    earns each F(2) = 0.5, so the two split allocations are the equilibria
    and both are optimal (welfare 2 vs 1 stacked).
    """
    w = covering_table(2)
    tables = (w, w)
    utilities = tuple(equal_shares_utility(t) for t in tables)
    actions = ((("r1",), ("r2",)),) * 2
    return GameInstance(("r1", "r2"), actions, tables, "local", utilities)
