"""Exception types shared across the package."""


class SkinbathError(Exception):
    """Base class for all package-specific errors."""


class SpecError(SkinbathError):
    """A system specification violates one of its invariants."""


class ConfigError(SkinbathError):
    """A scenario configuration failed schema validation.

    ``path`` points at the offending key, e.g. ``simulation.integrator.rtol``.
    """

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class BranchAmbiguityError(SkinbathError):
    """Self-energy evaluation requested exactly at a band edge (|y+| = |y-| = 1)."""


class SingularOperatorError(SkinbathError):
    """A shifted operator turned out to be singular during factorization."""


class IntegrationError(SkinbathError):
    """Time integration aborted; ``t_last`` is the last time with finite amplitudes."""

    def __init__(self, message, t_last):
        self.t_last = t_last
        super().__init__(f"{message} (last good time t = {t_last:.6g})")
