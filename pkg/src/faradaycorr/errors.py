"""Exception types shared across the package."""


class FaradaycorrError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(FaradaycorrError):
    """Operator shapes are incompatible."""


class NonHermitianError(FaradaycorrError):
    """An operation requiring a Hermitian input received a non-Hermitian one."""


class TruncationError(FaradaycorrError):
    """The Fock-space photon cutoff is too small for the requested amplitude."""


class NumericalGuardError(FaradaycorrError):
    """A numerical sanity check tripped (e.g. a trace with a large imaginary part)."""


class ResourceGuardError(FaradaycorrError):
    """A computation would exceed the configured memory budget."""


class ConfigError(FaradaycorrError):
    """A run configuration failed schema validation."""
