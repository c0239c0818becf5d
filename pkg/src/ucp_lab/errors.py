"""Exception types shared across the package."""


class UcpLabError(Exception):
    """Base class for all package errors."""


class DomainMismatchError(UcpLabError):
    """A field does not live on the grid an operation expects."""


class SupportConditionError(UcpLabError):
    """A field violates the support condition required near the outer slice."""


class NonAdmissibleError(UcpLabError):
    """A perturbation failed the pointwise admissibility bound.

    Carries the failed-bound description in args[0].
    """


class NormalizationError(UcpLabError):
    """Input profile violates a required normalization and renormalizing is off."""


class PreconditionError(UcpLabError):
    """A numerical precondition (residual / vanishing data) is not met."""


class FlowInstabilityError(UcpLabError):
    """Explicit flow step increased the functional beyond tolerance."""
