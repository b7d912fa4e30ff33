from __future__ import annotations

from typing import Any


class GuidanceLabError(Exception):
    """
    Base exception for the guidance laboratory.

    All library errors inherit from this class so callers (the CLI, the
    harness) can catch them explicitly. ``details`` carries structured
    diagnostics such as shapes, op names, step and seed.
    """
    def __init__(self, message: str, *, details: Any | None = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details

    def __str__(self) -> str:
        if self.details:
            return f"{type(self).__name__}: {self.message} ({self.details})"
        return f"{type(self).__name__}: {self.message}"


# ---------------------------------------------------------------- tensor core

class ShapeError(GuidanceLabError):
    """Raised when operand shapes are incompatible (matmul, conv, broadcast, masks)."""


class InvalidShapeError(ShapeError):
    """Raised when a requested shape has no dimensions or a non-positive dimension."""


class RankError(GuidanceLabError):
    """Raised when backward is called on a non-scalar tensor."""


class NoTapeError(GuidanceLabError):
    """Raised when backward is called on a tensor that is not part of a recorded graph."""


class NonFiniteError(GuidanceLabError):
    """Raised when an operation produces NaN or Inf."""


class NonFiniteGradientError(NonFiniteError):
    """Raised by the optimizer when a gradient contains NaN or Inf; the step is aborted."""


class DegenerateBatchError(GuidanceLabError):
    """Raised when a batch is too small for the requested statistic (batch norm, CKA, RSA)."""


class LabelError(GuidanceLabError):
    """Raised when a class label lies outside [0, classes)."""


# ---------------------------------------------------------------- similarity

class DegenerateRepresentationError(GuidanceLabError):
    """
    Raised when a representation makes a similarity metric undefined.

    Examples: a constant activation matrix (zero CKA denominator), a zero-norm
    row in an RDM, or a constant RDM lower triangle.
    """


class ContractViolationError(GuidanceLabError):
    """Raised when an operation's precondition on its input's state is violated."""


# ---------------------------------------------------------------- networks / guidance

class SpecError(GuidanceLabError):
    """Raised when a NetworkSpec violates its invariants."""


class UnsupportedMappingError(GuidanceLabError):
    """Raised when a guide has more activation taps than its target."""


# ---------------------------------------------------------------- data / io

class DatasetError(GuidanceLabError):
    """Raised when a dataset cannot be generated or ingested."""


class CheckpointError(GuidanceLabError):
    """Raised when a checkpoint is missing, truncated or has the wrong magic/version."""


class SchemaError(GuidanceLabError):
    """Raised when a run log does not conform to the CSV schema."""


# ---------------------------------------------------------------- harness / analysis

class ConfigError(GuidanceLabError):
    """Raised when an experiment configuration is invalid."""


class RaggedEpochsError(GuidanceLabError):
    """Raised when seeds of one run do not share the same epoch set."""


class SweepFailureError(GuidanceLabError):
    """Raised when every learning rate of a sweep failed."""


class UndefinedKappaError(GuidanceLabError):
    """Raised when error consistency is undefined (expected overlap equals 1)."""


class EmptySeriesError(GuidanceLabError):
    """Raised when asked to emit curves for an empty series set."""
