"""Exception types shared across the package."""


class ConfigError(Exception):
    """Invalid configuration file or run parameters (CLI exit code 2)."""


class NumericError(RuntimeError):
    """Numerical failure inside a solver (CLI exit code 3)."""


class PropagatorOverflowError(NumericError):
    """A matrix-exponential application would overflow.

    Only reachable with negative-direction steps, i.e. the modified-energy
    diagnostic; forward heat steps can only underflow.
    """


class DegenerateStateError(NumericError):
    """Nonlinear term undefined for the current state (field saturated at +-1)."""
