"""Exception hierarchy shared across the package."""


class PoaDesignError(Exception):
    """Base class for all domain errors raised by this package."""


class ValidationError(PoaDesignError):
    """An input object violates one of its declared invariants."""


class DimensionMismatchError(ValidationError):
    """Two objects that must share a player count do not."""


class CurvatureExceededError(ValidationError):
    """A welfare table's curvature exceeds the curvature bound it was paired with."""


class DegenerateCurvatureError(PoaDesignError):
    """Curvature bound c = 0 was supplied where the decomposition divides by c.

    Linear welfare admits the trivial mechanism F(x) = W(1) with every
    equilibrium optimal; callers should take that fast path instead.
    """


class DegenerateEnvelopeError(PoaDesignError):
    """The upper and lower envelope share a marginal at some step,
    so the candidate decomposition's denominator vanishes there."""


class EnvelopeConditionError(PoaDesignError):
    """A welfare function violates the envelope sandwich conditions,
    surfacing as a negative decomposition coefficient beyond tolerance."""


class BudgetExceededError(PoaDesignError):
    """The allocation space is larger than the enumeration budget."""


class UnsupportedModeError(PoaDesignError):
    """An operation was invoked on a game whose utility mode does not support it."""


class NotConvergedError(PoaDesignError):
    """A statistic defined at equilibrium was requested for a trajectory
    that did not converge."""


class DegenerateGameError(ValidationError):
    """Every allocation of the game covers nothing, so the efficiency
    ratio's denominator would be zero."""


class SolverError(PoaDesignError):
    """A linear program solve did not reach status \"optimal\"."""
