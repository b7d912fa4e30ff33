"""
Domain entities package.

Immutable records exchanged between the guidance loss, the harness and the
analysis services.
"""
from .layer_mapping import LayerMapping
from .activation_record import ActivationRecord
from .guided_loss import GuidedLossBreakdown
from .run_records import EpochRecord, RunSummary, SeedFailure
from .consistency import PredictionSet, ErrorConsistencyReport
from .examples import SequenceExample, ParityExample, ImageExample, DatasetSplit

__all__ = [
    "LayerMapping",
    "ActivationRecord",
    "GuidedLossBreakdown",
    "EpochRecord",
    "RunSummary",
    "SeedFailure",
    "PredictionSet",
    "ErrorConsistencyReport",
    "SequenceExample",
    "ParityExample",
    "ImageExample",
    "DatasetSplit",
]
