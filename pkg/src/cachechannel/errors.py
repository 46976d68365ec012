"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A parameter combination the model cannot represent."""


class FramingError(ValueError):
    """A received bit stream that cannot be split into code words."""


class ConfigFileError(ValueError):
    """A scenario or sweep file that fails schema validation."""
