"""Exception taxonomy shared across the engine.

Each class maps to a distinct CLI exit code (see cli.EXIT_CODES).
"""


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(EngineError):
    """Invalid parameter, grid, threshold set, or scenario value."""


class ConfigParseError(ConfigurationError):
    """Scenario text could not be parsed; carries file location context."""

    def __init__(self, message, line=None, field=None):
        loc = []
        if line is not None:
            loc.append("line %d" % line)
        if field is not None:
            loc.append("field %r" % field)
        if loc:
            message = "%s (%s)" % (message, ", ".join(loc))
        super().__init__(message)
        self.line = line
        self.field = field


class CflError(ConfigurationError):
    """Time step violates the advective stability bound."""


class DimensionError(EngineError):
    """Mismatched grids, array shapes, or non-dyadic lengths."""


class ResolutionError(EngineError):
    """Requested derivative order or scale beyond what the grid supports."""


class InstabilityError(EngineError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, message, step_index=None, time=None):
        super().__init__(message)
        self.step_index = step_index
        self.time = time


class ChecksumError(EngineError):
    """Stored dump does not match its recorded checksum."""


class UnsupportedConfigurationError(EngineError):
    """Valid configuration outside what this operation supports."""
