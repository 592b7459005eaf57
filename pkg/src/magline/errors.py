"""Exception hierarchy shared across the package.

The CLI maps these onto distinct process exit codes, so new error
conditions should subclass one of the four categories below rather
than raising bare ValueError.
"""


class MaglineError(Exception):
    """Base class for all package errors."""


class ConfigError(MaglineError):
    """Invalid configuration value, file, or schema."""


class ScenarioError(MaglineError):
    """Operation applied to the wrong scenario (e.g. a multi-mode
    routine called on a single-mode system)."""


class NumericalError(MaglineError):
    """Singular or otherwise numerically degenerate problem."""


class ConvergenceError(NumericalError):
    """Iterative scheme exhausted its budget before converging."""
