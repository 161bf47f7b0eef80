"""
Exception hierarchy for the simulator.
Precondition failures also derive from ValueError.
"""


class QuantumSimError(Exception):
    """Base class for every error raised by the simulator."""


class PreconditionError(QuantumSimError, ValueError):
    """An operation was called outside its documented domain."""


class DimensionMismatchError(PreconditionError):
    pass


class NormalizationError(PreconditionError):
    """A state handed to a measurement does not have unit norm."""


class QubitIndexError(PreconditionError):
    pass


class NonUnitaryGateError(PreconditionError):
    pass


class InvalidPermutationError(PreconditionError):
    pass


class TransformDomainError(PreconditionError):
    """Transform size or input outside the supported range."""


class UnknownVariantError(PreconditionError):
    pass


class InvalidLabelError(PreconditionError):
    pass


class InvalidSerialError(PreconditionError):
    pass


class InvalidWalkSpecError(PreconditionError):
    pass


class ImpossibleBranchError(QuantumSimError):
    """Projection onto an outcome that has (numerically) zero probability."""


class MemoryBudgetError(QuantumSimError):
    """The requested simulation exceeds the configured qubit/dimension budget."""


class AmbiguousSerialError(QuantumSimError):
    """Phase estimates do not single out one serial class; retry with more bits."""


class UnreachableBranchError(QuantumSimError):
    """A protocol branch that the analysis proves unreachable was reached."""
