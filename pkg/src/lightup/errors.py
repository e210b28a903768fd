"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A scenario or experiment configuration is invalid or unloadable."""


class NumericsError(RuntimeError):
    """A learner produced a non-finite value; the run cannot continue."""
