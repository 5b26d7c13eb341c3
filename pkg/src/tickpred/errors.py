"""Exception types that the CLI maps to distinct exit codes."""


class ConfigError(ValueError):
    """Invalid pipeline configuration (CLI exit code 1)."""


class DataError(ValueError):
    """Unusable input data (CLI exit code 2)."""


class SchemaError(DataError):
    """Column mapping does not match the input file."""


class EmptyInputError(DataError):
    """Input contained no parseable rows."""
