"""
Application Services - guidance loss, task metrics, training and analysis.
"""

from .analysis_service import (
    CurveSeries,
    error_consistency,
    extract_curves,
    extract_dissim_curves,
    extract_loss_curves,
    kappa_matrix,
    read_log,
)
from .guidance_service import (
    GuidanceService,
    compute_layer_mapping,
    flatten_activation,
    guide_batch,
    guided_loss,
    select_taps,
)
from .task_metrics import MetricAccumulator, compute_task_loss, eval_metrics, headline_metric, higher_is_better
from .trainer_service import (
    EvalResult,
    SeedResult,
    TrainerService,
    build_guide,
    evaluate,
    load_network,
    network_from_checkpoint,
    predict,
    train_seeds,
)

__all__ = [
    "CurveSeries",
    "error_consistency",
    "extract_curves",
    "extract_dissim_curves",
    "extract_loss_curves",
    "kappa_matrix",
    "read_log",
    "GuidanceService",
    "compute_layer_mapping",
    "flatten_activation",
    "guide_batch",
    "guided_loss",
    "select_taps",
    "MetricAccumulator",
    "compute_task_loss",
    "eval_metrics",
    "headline_metric",
    "higher_is_better",
    "EvalResult",
    "SeedResult",
    "TrainerService",
    "build_guide",
    "evaluate",
    "load_network",
    "network_from_checkpoint",
    "predict",
    "train_seeds",
]
