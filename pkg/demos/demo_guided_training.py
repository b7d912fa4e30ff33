# demo_guided_training.py
"""Baseline vs. untrained-guide training of a deep FCN on synthetic images."""
import tempfile
from pathlib import Path

from guidance_lab.application.use_cases import run_experiment
from guidance_lab.infrastructure.config import ExperimentConfig
from guidance_lab.infrastructure.datasets import ImageSynthSpec, load_image_dataset
from guidance_lab.shared.helpers import setup_logging

setup_logging(level="INFO")

dataset = load_image_dataset(synth_spec=ImageSynthSpec(classes=4, height=8, width=8, channels=1, n=400), seed=0)
base = {
    "task": "images",
    "target_spec": {"family": "fcn", "depth": 6, "width": 128, "classes": 4, "input_shape": [1, 8, 8]},
    "lr": 1e-3,
    "batch_size": 32,
    "epochs": 10,
    "seeds": [0, 1],
}
guided = {
    "guide_spec": {"family": "res_cnn", "depth": 3, "width": 8, "classes": 4, "input_shape": [1, 8, 8]},
    "guidance": {"guide_mode": "untrained"},
}

with tempfile.TemporaryDirectory() as tmp:
    for name, extra in (("baseline", {}), ("guided", guided)):
        config = ExperimentConfig.model_validate({**base, **extra, "experiment_id": name})
        summary = run_experiment(config, dataset, Path(tmp) / name).summary
        print(f"{name:>8}: epoch {summary.selected_epoch}, val_loss {summary.selected_val_loss:.4f}, "
              f"test accuracy {summary.test_metric_mean:.3f} ± {summary.test_metric_stderr:.3f}")
