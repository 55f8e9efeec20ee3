"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration value; message names the offending key."""


class TrainingFault(RuntimeError):
    """Non-finite loss or gradient encountered; the run must abort."""


class NoInformativeSamples(RuntimeError):
    """A training batch contained no rollout groups at all."""
