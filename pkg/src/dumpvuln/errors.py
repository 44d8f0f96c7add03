"""Exception hierarchy shared by the library and the CLI."""


class DumpVulnError(Exception):
    """Base class for all package errors."""


class ConfigError(DumpVulnError):
    """Invalid or incomplete run configuration (CLI exit code 2)."""


class DataError(DumpVulnError, ValueError):
    """Malformed input data or geometry (CLI exit code 3)."""


class GridFormatError(DataError):
    """ESRI ASCII grid could not be parsed."""


class FeatureFormatError(DataError):
    """Vector document could not be parsed."""
