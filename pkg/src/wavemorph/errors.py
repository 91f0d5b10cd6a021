"""Exception hierarchy. The CLI maps these onto exit codes."""


class WaveMorphError(Exception):
    """Base class for package errors."""


class ContractError(WaveMorphError, ValueError):
    """A numeric precondition or contract was violated (CLI exit code 4)."""


class DimensionError(ContractError):
    """An array has the wrong shape for the requested operation."""


class FormatError(WaveMorphError, ValueError):
    """A file could not be parsed or does not follow its format (CLI exit code 3)."""
