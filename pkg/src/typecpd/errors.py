"""Exception types shared across the package."""


class InputError(ValueError):
    """User-supplied data (files, flags, numeric arguments) is invalid."""


class ConfigError(ValueError):
    """Structurally valid inputs combine into an unusable problem setup."""
