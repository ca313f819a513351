"""Error types shared across the toolkit.

The command line maps DataError to exit code 1 and ConfigError to exit
code 2, so anything raised for malformed input files or incompatible
datasets must be a DataError, and anything raised for bad parameter
values must be a ConfigError.
"""


class DataError(ValueError):
    """Malformed or incompatible data: parse failures, schema mismatches."""


class ConfigError(ValueError):
    """Invalid configuration: out-of-range or unknown parameter values."""


class UnsupportedFeatureError(DataError):
    """Input uses a file construct this toolkit deliberately does not read."""
