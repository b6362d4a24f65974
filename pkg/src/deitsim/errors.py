"""Exception hierarchy shared by all deitsim modules.

Config problems (bad files, unknown keys, impossible level assignments
requested by the user) are distinct from physics/numerics failures so the
CLI can map them to different exit codes.
"""


class DeitsimError(Exception):
    """Base class for all package errors."""


class ConfigError(DeitsimError):
    """Invalid configuration, constants table, or level assignment."""


class PhysicsError(DeitsimError):
    """A computation hit an invalid physical regime or failed numerically."""


class SingularityError(PhysicsError):
    """Division by a vanishing detuning or resonance denominator."""


class ModeError(PhysicsError):
    """Operation called outside its supported regime (precondition)."""


class LevelCrossingError(PhysicsError):
    """Level assignment is ambiguous at the requested magnetic field."""


class IntegrationError(PhysicsError):
    """Time integration failed or broke a state invariant."""

    def __init__(self, message, breach=None):
        super().__init__(message)
        self.breach = breach


class ConvergenceError(PhysicsError):
    """Iterative procedure (pumping, steady-state search) did not settle."""
