"""Exception types raised across the package."""


class StackSatError(Exception):
    """Base class for all package errors."""


class GameValidationError(StackSatError, ValueError):
    """A game's matrices violate shape or finiteness requirements."""


class ActionIndexError(StackSatError, IndexError):
    pass


class InvalidStrategyError(StackSatError, ValueError):
    pass


class MalformedProblemError(StackSatError, ValueError):
    """LP data with inconsistent dimensions."""


class IterationLimitError(StackSatError, RuntimeError):
    """The simplex method hit its pivot budget without terminating."""


class InvalidSeedError(StackSatError, ValueError):
    """A warm-start basis is not a basic feasible solution of the LP.

    This indicates a caller bug, not infeasibility of the problem.
    """


class AllInfeasibleError(StackSatError, RuntimeError):
    """Every follower-indexed LP came back infeasible.

    At least one of these LPs is always feasible, so this signals a solver
    defect rather than a property of the game.
    """


class InvalidConstantError(StackSatError, ValueError):
    pass


class EmptyTraceError(StackSatError, ValueError):
    pass


class FixtureCorruptError(StackSatError, RuntimeError):
    pass


class DominanceViolation(StackSatError, AssertionError):
    """Pure-commitment satisfaction utility fell below the standard utility.

    The ordering is a theorem for pure commitment, so a violation is a bug.
    """
