"""Exception types shared across the package."""


class WapproxError(Exception):
    """Base class for all package errors."""


class PrecisionExhausted(WapproxError):
    """A comparison stayed undecidable at the policy's maximum precision."""


class UndecidableComparison(WapproxError):
    """Internal control-flow signal: retry the computation at higher precision.

    Never escapes a public entry point; ``with_escalation`` and the local
    comparison helpers convert it into either a decision or
    :class:`PrecisionExhausted`.
    """


class ZeroVector(WapproxError):
    """An operation that requires a nonzero integer vector received zero."""


class DependentTargets(WapproxError):
    """1, xi1, xi2 were found rationally dependent (witness attached)."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class OutOfRange(WapproxError):
    """A parameter lies outside the domain of the queried object."""


class WindowTooShort(WapproxError):
    """The q-window does not contain enough structure for the request."""


class CapExceeded(WapproxError):
    """The brute-force oracle was asked to run beyond its configured cap."""


class PoleInput(WapproxError):
    """Transfer-function argument at or beyond the pole of its domain."""


class ConfigError(WapproxError):
    """A run configuration or number-spec string failed to parse/validate."""
