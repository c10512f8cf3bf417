"""Error taxonomy shared by the library and the CLI.

Exit codes: 0 success, 1 usage/config, 2 data, 3 numeric.
"""


class MvError(Exception):
    """Base class; carries the process exit code for the CLI."""

    exit_code = 1


class ConfigError(MvError):
    """Bad configuration, bad usage, constraint violation."""

    exit_code = 1


class DataError(MvError):
    """Malformed, misaligned, or non-numeric input data."""

    exit_code = 2


class NumericError(MvError):
    """Non-finite value produced during computation."""

    exit_code = 3
