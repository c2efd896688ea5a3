"""Exception types shared across the package."""

from __future__ import annotations


class RedopfError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(RedopfError):
    """Case file text is malformed (missing matrix, bad row, wrong column count)."""


class UnsupportedError(RedopfError):
    """Case file uses a feature outside the supported subset (e.g. cubic costs)."""


class ValidationError(RedopfError):
    """A domain invariant is violated (no slack bus, zero reactance, ...)."""


class InvalidRange(RedopfError):
    """A sampling range is empty, inverted, or not strictly positive."""


class DimensionMismatch(RedopfError):
    """Vector length does not match the expected layout."""


class SolverFailure(RedopfError):
    """A QP solve did not reach optimality; carries whatever was computed so far."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class EmptyDataset(RedopfError):
    """Operation requires at least one dataset record."""


class EmptyBatch(RedopfError):
    """Operation requires a non-empty batch of reports."""


class InvalidPerturbation(RedopfError):
    """Requested number of injected errors exceeds what the instance admits."""


class NonpositiveBaseline(RedopfError):
    """Gain is undefined for a non-positive full-problem cost."""


class ConfigError(RedopfError):
    """Experiment configuration is missing, malformed, or inconsistent."""
