"""
Trainer Service - baseline and guided training of one experiment seed.

Per step: forward the target with taps, forward the frozen guide (no
gradient recording), assemble task loss plus dissimilarity, backward,
optionally clip, Adam/AdamW update. Per epoch: evaluate on val and test,
write CSV rows and checkpoints (last and best-val).
"""
from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from guidance_lab.application.services.guidance_service import GuidanceService
from guidance_lab.application.services.task_metrics import (
    MetricAccumulator,
    compute_task_loss,
    headline_metric,
)
from guidance_lab.domain.entities import DatasetSplit, EpochRecord, PredictionSet, SeedFailure
from guidance_lab.domain.exceptions import (
    CheckpointError,
    ConfigError,
    ContractViolationError,
    DatasetError,
    DegenerateRepresentationError,
    NonFiniteError,
)
from guidance_lab.domain.value_objects import GuideMode, NormMode, TaskLossName, TaskName
from guidance_lab.infrastructure.config import ExperimentConfig, NetworkSpec
from guidance_lab.infrastructure.datasets import Batch, iterate_batches, pad_id_for
from guidance_lab.infrastructure.integrations.checkpoint_store import Checkpoint, load_checkpoint, save_checkpoint
from guidance_lab.infrastructure.integrations.run_logger import CsvRunLogger
from guidance_lab.infrastructure.networks import Network, build_network, forward_with_taps, restore_network
from guidance_lab.shared.constants import IGNORE_INDEX
from guidance_lab.shared.core import RngState, backward, build_optimizer, clip_grad_norm, no_grad
from guidance_lab.shared.helpers import ProgressLogger, get_logger, log_duration

logger = get_logger(__name__)

BUFFER_PREFIX = "buffer:"
LAST_CHECKPOINT = "last.glab"
BEST_CHECKPOINT = "best.glab"


@dataclass
class EvalResult:
    """Mean task loss and the task's metric set over one split."""
    loss: float
    metric: float
    metrics: Dict[str, float]


@dataclass
class SeedResult:
    seed: int
    records: List[EpochRecord] = field(default_factory=list)
    failure: Optional[SeedFailure] = None
    best_val_loss: Optional[float] = None
    best_checkpoint: Optional[Path] = None
    steps: int = 0


# ============================================================================
# EVALUATION
# ============================================================================

def _scored_count(targets: np.ndarray, task: TaskName) -> int:
    if task.is_per_token:
        return int((targets != IGNORE_INDEX).sum())
    return int(targets.shape[0])


@contextmanager
def _inference_mode(net: Network) -> Iterator[None]:
    """Run a TRAIN-mode network with running statistics, restoring its mode afterwards."""
    previous = net.mode
    if previous == NormMode.TRAIN:
        net.set_mode(NormMode.EVAL)
    try:
        yield
    finally:
        net.set_mode(previous)


def evaluate(
    net: Network,
    examples: Sequence[Any],
    task: TaskName,
    loss_name: TaskLossName = TaskLossName.CROSS_ENTROPY,
    batch_size: int = 64,
    pad_id: int = 0,
) -> EvalResult:
    """
    Mean task loss and metrics of ``net`` over ``examples``.

    Runs without gradient recording and, for a network in TRAIN mode, with
    running normalization statistics; nothing about ``net`` changes.
    """
    if not examples:
        raise DatasetError("cannot evaluate an empty split")
    task = TaskName(task)
    accumulator = MetricAccumulator(task)
    loss_sum = 0.0
    weight = 0
    with no_grad(), _inference_mode(net):
        for batch in iterate_batches(examples, batch_size, pad_id=pad_id):
            logits = net.forward(batch.inputs, batch.pad_mask)
            loss = compute_task_loss(logits, batch.targets, loss_name)
            count = _scored_count(batch.targets, task)
            loss_sum += loss.item() * count
            weight += count
            accumulator.update(logits, batch.targets)
    metrics = accumulator.result()
    return EvalResult(loss=loss_sum / weight, metric=metrics[headline_metric(task)], metrics=metrics)


def predict(
    net: Network,
    examples: Sequence[Any],
    task: TaskName,
    loss_name: TaskLossName = TaskLossName.CROSS_ENTROPY,
    batch_size: int = 64,
    pad_id: int = 0,
) -> PredictionSet:
    """Per-example class predictions of a classifier (parity, images)."""
    task = TaskName(task)
    if task.is_per_token:
        raise ConfigError("predictions are per example; per-token tasks are not supported", details={"task": task.value})
    ids: List[str] = []
    predicted: List[int] = []
    true: List[int] = []
    with no_grad(), _inference_mode(net):
        for batch in iterate_batches(examples, batch_size, pad_id=pad_id):
            logits = net.forward(batch.inputs, batch.pad_mask).numpy()
            if TaskLossName(loss_name) == TaskLossName.BCE or logits.shape[-1] == 1:
                labels = (logits.reshape(-1) > 0).astype(np.int64)
            else:
                labels = logits.argmax(axis=-1)
            ids.extend(batch.ids)
            predicted.extend(int(v) for v in labels)
            true.extend(int(v) for v in batch.targets)
    return PredictionSet.from_labels(ids, predicted, true)


# ============================================================================
# NETWORK CONSTRUCTION
# ============================================================================

def network_from_checkpoint(checkpoint: Checkpoint, spec: Optional[NetworkSpec] = None, source: str = "") -> Network:
    """Rebuild a network from checkpoint tensors; ``spec`` defaults to the stored one."""
    stored = checkpoint.meta.get("spec")
    if spec is None:
        if stored is None:
            raise CheckpointError("checkpoint has no network spec", details={"path": source})
        spec = NetworkSpec(**stored)
    elif stored is not None and stored != spec.to_dict():
        raise CheckpointError(
            "checkpoint network spec differs from the configured one",
            details={"path": source, "stored": stored.get("family")},
        )
    params = {k: v for k, v in checkpoint.tensors.items() if not k.startswith(BUFFER_PREFIX)}
    buffers = {k[len(BUFFER_PREFIX):]: v for k, v in checkpoint.tensors.items() if k.startswith(BUFFER_PREFIX)}
    return restore_network(spec, params, buffers)


def load_network(path: str | Path, spec: Optional[NetworkSpec] = None) -> Network:
    return network_from_checkpoint(load_checkpoint(path), spec, str(path))


def build_guide(config: ExperimentConfig, rng: RngState) -> Optional[Network]:
    """
    The frozen guide for ``config.guidance.guide_mode``.

    Trained guides (and noise guides given a checkpoint) run with their
    running statistics; untrained guides use batch statistics and never
    update them.
    """
    mode = config.guidance.guide_mode
    if mode == GuideMode.NONE:
        return None
    if config.guide_checkpoint and mode in (GuideMode.TRAINED, GuideMode.NOISE):
        guide = load_network(config.guide_checkpoint, config.guide_spec)
        return guide.freeze(NormMode.EVAL)
    if mode == GuideMode.TRAINED:
        raise CheckpointError("trained guide mode needs guide_checkpoint")
    return build_network(config.guide_spec, rng).freeze(NormMode.FROZEN)


# ============================================================================
# TRAINER
# ============================================================================

class TrainerService:
    """
    Trains one experiment seed by seed.

    Usage:
        trainer = TrainerService(config, dataset, run_dir)
        with CsvRunLogger(run_dir / "log.csv", config.experiment_id) as log:
            result = trainer.train_seed(0, log)
    """

    def __init__(
        self,
        config: ExperimentConfig,
        dataset: DatasetSplit,
        run_dir: Optional[Path] = None,
        save_checkpoints: bool = True,
    ):
        if not dataset.train or not dataset.val:
            raise DatasetError("training needs non-empty train and val splits", details={"sizes": dataset.sizes()})
        self.config = config
        self.dataset = dataset
        self.run_dir = Path(run_dir) if run_dir is not None else None
        self.save_checkpoints = save_checkpoints and run_dir is not None
        self.task = TaskName(config.task)
        self.pad_id = pad_id_for(dataset)
        self.metric_name = headline_metric(self.task)

        logger.info(
            f"TrainerService initialized: {config.experiment_id} task={self.task} "
            f"target={config.target_spec.family} guide={config.guidance.guide_mode}"
        )

    # ---------------------------------------------------------------- helpers

    def _seed_dir(self, seed: int) -> Optional[Path]:
        return self.run_dir / f"seed_{seed}" if self.run_dir is not None else None

    def _evaluate(self, net: Network, split: str) -> Optional[EvalResult]:
        examples = self.dataset.part(split)
        if not examples:
            return None
        return evaluate(net, examples, self.task, self.config.task_loss, self.config.batch_size, self.pad_id)

    def _checkpoint(self, net: Network, optimizer, rng: RngState, seed: int, epoch: int, step: int,
                    val_loss: float) -> Checkpoint:
        return Checkpoint(
            tensors=net.state_dict(),
            optimizer=optimizer.state,
            rng_seed=rng.seed,
            rng_state=rng.get_state(),
            meta={
                "experiment_id": self.config.experiment_id,
                "task": self.task.value,
                "seed": seed,
                "epoch": epoch,
                "step": step,
                "val_loss": val_loss,
                "spec": self.config.target_spec.to_dict(),
            },
        )

    def _guidance(self, guide: Optional[Network], target: Network, rng: RngState) -> GuidanceService:
        guidance = self.config.guidance
        token_vocab = guide.spec.vocab if guide is not None else None
        return GuidanceService(
            guide,
            target.tap_list,
            metric=guidance.metric.value,
            guide_input=guidance.effective_input,
            disconnect_after_steps=guidance.disconnect_after_steps,
            noise_rng=rng,
            token_vocab=token_vocab,
            guide_tap_names=guidance.guide_taps,
            target_tap_names=guidance.target_taps,
        )

    # ---------------------------------------------------------------- training

    def train_seed(self, seed: int, log: Optional[CsvRunLogger] = None) -> SeedResult:
        """Train a fresh target for ``config.epochs`` epochs; a NaN aborts the seed, not the run."""
        config = self.config
        root = RngState(seed)
        shuffle_rng = root.child("shuffle")
        target = build_network(config.target_spec, root.child("target_init"))
        guide = build_guide(config, root.child("guide_init"))
        guide_snapshot = guide.state_dict() if guide is not None else None
        guidance = self._guidance(guide, target, root.child("guide_noise"))
        optimizer = build_optimizer(
            config.optimizer.name,
            target.named_parameters(),
            config.lr,
            betas=(config.optimizer.beta1, config.optimizer.beta2),
            eps=config.optimizer.eps,
            weight_decay=config.optimizer.weight_decay,
        )
        target.train()

        result = SeedResult(seed=seed)
        seed_dir = self._seed_dir(seed)
        progress = ProgressLogger(logger, config.epochs)
        epoch = 0
        try:
            for epoch in range(1, config.epochs + 1):
                started = time.perf_counter()
                sums = self._train_epoch(target, guidance, optimizer, shuffle_rng, seed, epoch, result, log)
                target.eval()
                val = self._evaluate(target, "val")
                test = self._evaluate(target, "test")
                target.train()
                wall_ms = int((time.perf_counter() - started) * 1000) if config.record_wall_time else 0

                record = EpochRecord(
                    seed=seed,
                    epoch=epoch,
                    train_total=sums[0],
                    train_task=sums[1],
                    train_dissim=sums[2],
                    val_loss=val.loss,
                    val_metric=val.metric,
                    test_loss=test.loss if test else None,
                    test_metric=test.metric if test else None,
                    wall_ms=wall_ms,
                )
                result.records.append(record)
                if log is not None:
                    for split, evaluation in (("val", val), ("test", test)):
                        if evaluation is None:
                            continue
                        log.row(seed=seed, epoch=epoch, step=result.steps, split=split,
                                total_loss=evaluation.loss, task_loss=evaluation.loss, dissim_loss=0.0,
                                metric=evaluation.metric, lr=optimizer.lr, wall_ms=wall_ms)
                    log.flush()

                improved = result.best_val_loss is None or val.loss < result.best_val_loss
                if improved:
                    result.best_val_loss = val.loss
                if self.save_checkpoints:
                    checkpoint = self._checkpoint(target, optimizer, shuffle_rng, seed, epoch, result.steps, val.loss)
                    save_checkpoint(seed_dir / LAST_CHECKPOINT, checkpoint)
                    if improved:
                        result.best_checkpoint = save_checkpoint(seed_dir / BEST_CHECKPOINT, checkpoint)

                progress.step(
                    f"seed {seed} epoch {epoch}: train={record.train_total:.4f} "
                    f"(task {record.train_task:.4f}, dissim {record.train_dissim:.4f}) "
                    f"val_loss={val.loss:.4f} val_{self.metric_name}={val.metric:.4f}"
                )
        except (NonFiniteError, DegenerateRepresentationError) as e:
            result.failure = SeedFailure(seed=seed, epoch=epoch, step=result.steps + 1, reason=str(e))
            logger.warning(f"Seed {seed} aborted at epoch {epoch}, step {result.steps + 1}: {e}")

        if guide is not None:
            self._check_guide_unchanged(guide, guide_snapshot)
        return result

    def _train_epoch(self, target, guidance, optimizer, shuffle_rng, seed, epoch, result, log) -> Tuple[float, float, float]:
        """One pass over the train split; returns mean (total, task, dissim) per optimizer step."""
        config = self.config
        accumulate = config.accumulate_steps
        epoch_sums = np.zeros(3)
        epoch_steps = 0
        window = np.zeros(3)
        pending = 0

        batches = list(iterate_batches(self.dataset.train, config.batch_size, shuffle_rng, self.pad_id))
        for index, batch in enumerate(batches):
            step = result.steps + 1
            breakdown = self._micro_step(target, guidance, batch, step, accumulate)
            window += (breakdown.total_value, breakdown.task_value, breakdown.dissimilarity_value)
            pending += 1
            if pending < accumulate and index < len(batches) - 1:
                continue

            if pending < accumulate:
                scale = accumulate / pending
                for p in target.parameters():
                    if p.grad is not None:
                        p.grad = p.grad * np.asarray(scale, dtype=p.grad.dtype)
            if config.grad_clip is not None:
                clip_grad_norm(target.parameters(), config.grad_clip)
            optimizer.step()
            optimizer.zero_grad()

            result.steps = step
            means = window / pending
            epoch_sums += means
            epoch_steps += 1
            if log is not None:
                log.row(seed=seed, epoch=epoch, step=step, split="train", total_loss=means[0],
                        task_loss=means[1], dissim_loss=means[2], metric=None, lr=optimizer.lr)
            logger.step(f"seed {seed} step {step}: total={means[0]:.5f} task={means[1]:.5f} dissim={means[2]:.5f}")
            window[:] = 0.0
            pending = 0

        means = epoch_sums / max(epoch_steps, 1)
        return float(means[0]), float(means[1]), float(means[2])

    def _micro_step(self, target: Network, guidance: GuidanceService, batch: Batch, step: int, accumulate: int):
        logits, record = forward_with_taps(target, batch)
        task_loss = compute_task_loss(logits, batch.targets, self.config.task_loss)
        breakdown = guidance.loss(task_loss, record, batch, step)
        objective = breakdown.total if accumulate == 1 else breakdown.total * (1.0 / accumulate)
        backward(objective)
        return breakdown

    @staticmethod
    def _check_guide_unchanged(guide: Network, snapshot: Dict[str, np.ndarray]) -> None:
        current = guide.state_dict()
        for name, value in snapshot.items():
            if not np.array_equal(current[name], value):
                raise ContractViolationError("guide state changed during training", details={"tensor": name})
        for name, param in guide.named_parameters():
            if param.grad is not None and np.any(param.grad):
                raise ContractViolationError("guide parameter received a gradient", details={"param": name})


def train_seeds(
    config: ExperimentConfig,
    dataset: DatasetSplit,
    run_dir: Optional[Path],
    log: Optional[CsvRunLogger] = None,
    save_checkpoints: bool = True,
) -> List[SeedResult]:
    trainer = TrainerService(config, dataset, run_dir, save_checkpoints)
    results = []
    for seed in config.seeds:
        with log_duration(logger, f"{config.experiment_id} seed {seed}"):
            results.append(trainer.train_seed(seed, log))
    return results
