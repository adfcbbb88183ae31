"""
Root exception hierarchy for the toolkit.
Module-level errors derive from one of the three roots so the CLI can map
any failure onto a stable exit code.
"""


class RomToolkitError(Exception):
    """Base class for every error raised by the toolkit."""
    pass


class ConfigurationError(RomToolkitError):
    """Invalid configuration or input values (CLI exit code 2)."""
    pass


class NumericalFailure(RomToolkitError):
    """A numerical stage failed: divergence, conditioning, bad shapes (exit code 3)."""
    pass


class ArtifactIOError(RomToolkitError):
    """Reading or writing an artifact failed (exit code 4)."""
    pass


EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def exit_code_for(error: BaseException) -> int:
    """
    Map an exception onto the CLI exit code.

    Args:
        error: Exception raised by a command

    Returns:
        Exit code (2 config, 3 numerical, 4 I/O)
    """
    # Stage wrappers report the code of the failure they carry
    cause = getattr(error, 'cause', None)
    if isinstance(cause, BaseException):
        return exit_code_for(cause)
    if isinstance(error, ConfigurationError):
        return EXIT_CONFIG
    if isinstance(error, (ArtifactIOError, OSError)):
        return EXIT_IO
    return EXIT_NUMERICAL
