"""
errors.py collects the exceptions raised across ``encircle``.

Scenario problems are ``ValueError``s, numerical divergence of a run
is a ``RuntimeError``.
"""


class ScenarioError(ValueError):
    """Base class for problems with an experiment description."""


class ParseError(ScenarioError):
    """The scenario file is not valid JSON or does not match the schema."""


class ValidationError(ScenarioError):
    """A scenario parses but violates one of its invariants

    Parameters
    ----------
    invariant : str
        short name of the violated assumption or invariant,
        e.g. ``'connectivity'`` or ``'w_d'``
    message : str
        human readable explanation
    """

    def __init__(self, invariant, message):
        super().__init__(f"[{invariant}] {message}")
        self.invariant = invariant


class GainTooSmall(ValueError):
    """n * k_e does not exceed eta + 2 * n * beta, the bound set is empty."""

    def __init__(self, lhs, rhs):
        super().__init__(
            f"estimator gain too small: n*k_e = {lhs:.6g} must exceed "
            f"eta + 2*n*beta = {rhs:.6g}"
        )
        self.lhs = lhs
        self.rhs = rhs


class Infeasible(ValueError):
    """The requested accuracy/settling pair cannot be met by any alpha1."""


class DegenerateRadius(ValueError):
    """One or more followers sit on their estimated center."""

    def __init__(self, followers):
        followers = list(followers)
        super().__init__(f"degenerate radius for followers {followers}")
        self.followers = followers


class RingOrderError(ValueError):
    """The included angles around the ring no longer sum to 2*pi."""


class NumericalBlowup(RuntimeError):
    """A state coordinate left the finite range during integration."""

    def __init__(self, time, message=None):
        if message is None:
            message = f"numerical blowup at t={time:.6g} s"
        super().__init__(message)
        self.time = time
