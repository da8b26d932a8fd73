"""Shared exception types."""


class FlagwalkError(Exception):
    pass


class DecompositionError(FlagwalkError):
    """Matrix factorization failed (singular or badly conditioned input)."""


class PreconditionError(FlagwalkError, ValueError):
    """An operation was called with inputs violating its contract."""


class ConfigurationError(FlagwalkError, ValueError):
    """A geometric or experiment configuration was refused."""
