"""
Task losses and evaluation metrics.

Headline metrics: accuracy for parity and images (plus top-5 when there are
at least five classes), token accuracy over scored positions for
copy-paste (exact-sequence accuracy reported alongside) and perplexity for
language modeling. Accuracies are fractions in [0, 1].
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from guidance_lab.domain.exceptions import LabelError, ShapeError
from guidance_lab.domain.value_objects import TaskLossName, TaskName
from guidance_lab.shared.constants import IGNORE_INDEX
from guidance_lab.shared.core import Tensor, bce_with_logits, mse_loss, softmax_cross_entropy

HEADLINE_METRICS: Dict[TaskName, str] = {
    TaskName.COPY_PASTE: "token_accuracy",
    TaskName.PARITY: "accuracy",
    TaskName.IMAGES: "accuracy",
    TaskName.LANGUAGE_MODELING: "perplexity",
}


def headline_metric(task: TaskName) -> str:
    return HEADLINE_METRICS[TaskName(task)]


def higher_is_better(task: TaskName) -> bool:
    return headline_metric(task) != "perplexity"


def compute_task_loss(logits: Tensor, targets: np.ndarray, loss_name: TaskLossName) -> Tensor:
    """
    Scalar task loss for a batch.

    ``cross_entropy`` takes (..., C) logits; ``bce`` a single logit per
    example against 0/1 labels; ``mse`` compares logits to one-hot targets
    over scored positions.
    """
    loss_name = TaskLossName(loss_name)
    targets = np.asarray(targets)
    if loss_name == TaskLossName.CROSS_ENTROPY:
        return softmax_cross_entropy(logits, targets)
    if loss_name == TaskLossName.BCE:
        return bce_with_logits(logits.reshape(-1), targets.reshape(-1))

    classes = logits.shape[-1]
    scored = targets != IGNORE_INDEX
    labels = targets[scored]
    if labels.size == 0:
        raise LabelError("no scored positions in batch")
    if labels.min() < 0 or labels.max() >= classes:
        raise LabelError("label out of range", details={"classes": classes})
    one_hot = np.eye(classes, dtype=logits.dtype)[labels]
    if scored.all():
        return mse_loss(logits.reshape(-1, classes), one_hot)
    return mse_loss(logits[np.nonzero(scored)], one_hot)


@dataclass
class MetricAccumulator:
    """Streams batches of (logits, targets) and reports the task's metric set."""
    task: TaskName
    correct: int = 0
    scored: int = 0
    top5_correct: int = 0
    sequences_correct: int = 0
    sequences: int = 0
    nll_sum: float = 0.0
    top5_seen: bool = False

    def __post_init__(self) -> None:
        self.task = TaskName(self.task)

    def update(self, logits: Any, targets: Any) -> None:
        logits = np.asarray(logits.data if isinstance(logits, Tensor) else logits, dtype=np.float64)
        targets = np.asarray(targets, dtype=np.int64)
        if self.task.is_per_token:
            self._update_tokens(logits, targets)
        else:
            self._update_classes(logits, targets)

    def _update_classes(self, logits: np.ndarray, targets: np.ndarray) -> None:
        if logits.ndim == 1 or logits.shape[-1] == 1:
            logits = logits.reshape(-1)
            if logits.shape[0] != targets.shape[0]:
                raise ShapeError("prediction count does not match targets",
                                 details={"predictions": logits.shape[0], "targets": targets.shape[0]})
            predicted = (logits > 0).astype(np.int64)
        else:
            if logits.shape[0] != targets.shape[0]:
                raise ShapeError("prediction count does not match targets",
                                 details={"predictions": logits.shape[0], "targets": targets.shape[0]})
            predicted = logits.argmax(axis=-1)
            if self.task == TaskName.IMAGES and logits.shape[-1] >= 5:
                self.top5_seen = True
                top5 = np.argsort(-logits, axis=-1, kind="stable")[:, :5]
                self.top5_correct += int((top5 == targets[:, None]).any(axis=1).sum())
        self.correct += int((predicted == targets).sum())
        self.scored += int(targets.shape[0])

    def _update_tokens(self, logits: np.ndarray, targets: np.ndarray) -> None:
        if logits.shape[:-1] != targets.shape:
            raise ShapeError("prediction count does not match targets",
                             details={"predictions": logits.shape[:-1], "targets": targets.shape})
        scored = targets != IGNORE_INDEX
        predicted = logits.argmax(axis=-1)
        hits = (predicted == targets) & scored
        self.correct += int(hits.sum())
        self.scored += int(scored.sum())

        rows = scored.any(axis=1)
        self.sequences += int(rows.sum())
        self.sequences_correct += int(((hits == scored).all(axis=1) & rows).sum())

        shifted = logits - logits.max(axis=-1, keepdims=True)
        log_probs = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
        safe = np.where(scored, targets, 0)
        picked = np.take_along_axis(log_probs, safe[..., None], axis=-1)[..., 0]
        self.nll_sum += float(-picked[scored].sum())

    def result(self) -> Dict[str, float]:
        if self.scored == 0:
            raise ShapeError("no scored predictions to evaluate")
        if self.task == TaskName.COPY_PASTE:
            return {
                "token_accuracy": self.correct / self.scored,
                "sequence_accuracy": self.sequences_correct / max(self.sequences, 1),
            }
        if self.task == TaskName.LANGUAGE_MODELING:
            return {
                "perplexity": float(np.exp(self.nll_sum / self.scored)),
                "token_accuracy": self.correct / self.scored,
            }
        metrics = {"accuracy": self.correct / self.scored}
        if self.top5_seen:
            metrics["top5_accuracy"] = self.top5_correct / self.scored
        return metrics


def eval_metrics(logits: Any, targets: Any, task: TaskName) -> Dict[str, float]:
    """Metric set for one array of predictions against its targets."""
    accumulator = MetricAccumulator(task)
    accumulator.update(logits, targets)
    return accumulator.result()
