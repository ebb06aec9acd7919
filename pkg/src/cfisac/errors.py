"""Exception types shared across the toolkit."""


class NullspaceEmpty(Exception):
    """Raised when an interference null space contains only the zero vector."""


class GlobalInfeasible(Exception):
    """Raised when the central-unit subproblem is infeasible at every iteration.

    Signals that the sensing threshold cannot be met under the per-AP power
    budgets for the given channel draw.
    """


class ConfigError(Exception):
    """Raised for invalid or inconsistent configuration input."""
