"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, file/IO problems
(FileFormatError, OSError) -> 3, NumericError -> 4.
"""


class ConfigError(ValueError):
    """Invalid configuration: bad grid counts, extents, matrix shapes, keys."""


class FileFormatError(RuntimeError):
    """A data file has a bad magic number, version, or inconsistent header."""


class NumericError(RuntimeError):
    """A numeric computation failed (non-finite data, no convergence)."""
