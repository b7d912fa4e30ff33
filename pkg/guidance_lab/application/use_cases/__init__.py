"""
Use cases (interactors) package.

High-level experiment flows built on the application services:
- run_experiment: multi-seed training with logs, checkpoints and summary
- lr_sweep: shortened runs over five learning rates
- train_guide: produce a trained guide checkpoint
- select_best_epoch: seed-averaged model selection
"""
from .model_selection import select_best_epoch, standard_error
from .run_experiment import ExperimentResult, run_experiment
from .lr_sweep import SweepResult, choose_lr, lr_sweep, sweep_epochs, sweep_learning_rates
from .train_guide import train_guide

__all__ = [
    "select_best_epoch",
    "standard_error",
    "ExperimentResult",
    "run_experiment",
    "SweepResult",
    "choose_lr",
    "lr_sweep",
    "sweep_epochs",
    "sweep_learning_rates",
    "train_guide",
]
