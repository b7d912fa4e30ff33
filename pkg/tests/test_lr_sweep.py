"""
Tests for the learning-rate sweep.
"""
import pytest

from guidance_lab.application.use_cases.lr_sweep import choose_lr, lr_sweep, sweep_epochs, sweep_learning_rates
from guidance_lab.domain.entities import RunSummary
from guidance_lab.domain.exceptions import ConfigError, SweepFailureError

LRS = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2]


def summary(experiment_id, val_loss):
    if val_loss is None:
        return RunSummary(experiment_id, (0,), (), None, None, None, None)
    return RunSummary(experiment_id, (0,), ((0, 1),), 1, val_loss, 0.5, 0.0)


class FakeRunner:
    """Returns canned validation losses in call order and records each call."""

    def __init__(self, losses):
        self.losses = list(losses)
        self.calls = []

    def __call__(self, config, run_dir):
        self.calls.append((config, run_dir))
        return summary(config.experiment_id, self.losses[len(self.calls) - 1])


class TestSweepHelpers:

    def test_default_grid_scales_base_lr(self, tiny_config_factory):
        lrs = sweep_learning_rates(tiny_config_factory(lr=1e-3))
        assert lrs == pytest.approx([1e-4, 3e-4, 1e-3, 3e-3, 1e-2])

    def test_wrong_grid_size(self, tiny_config_factory):
        with pytest.raises(ConfigError):
            sweep_learning_rates(tiny_config_factory(sweep_lrs=[1e-3, 1e-2]))

    def test_non_positive_lr(self, tiny_config_factory):
        with pytest.raises(ConfigError):
            sweep_learning_rates(tiny_config_factory(sweep_lrs=[0.0, 1e-3, 1e-2, 1e-1, 1.0]))

    @pytest.mark.parametrize("epochs,expected", [(1, 1), (2, 1), (8, 2), (30, 7), (100, 25)])
    def test_quarter_of_epochs(self, epochs, expected):
        assert sweep_epochs(epochs) == expected

    def test_tie_goes_to_smaller_lr(self):
        assert choose_lr([(1e-2, 1.0), (1e-3, 1.0), (1e-1, 2.0)]) == 1e-3

    def test_non_finite_losses_excluded(self):
        assert choose_lr([(1e-3, float("nan")), (1e-2, None), (1e-1, 5.0)]) == 1e-1

    def test_everything_diverged(self):
        with pytest.raises(SweepFailureError):
            choose_lr([(1e-3, None), (1e-2, float("inf"))])


class TestLrSweep:

    def test_picks_lowest_validation_loss(self, tiny_config_factory, tmp_path):
        runner = FakeRunner([3.1, 2.0, 2.5, 4.0, 9.9])
        result = lr_sweep(tiny_config_factory(epochs=8), lrs=LRS, runner=runner, run_dir=tmp_path)
        assert result.chosen_lr == LRS[1]
        assert [lr for lr, _ in result.entries] == LRS
        assert result.to_dict()["chosen_lr"] == LRS[1]

    def test_runs_are_shortened_and_named(self, tiny_config_factory, tmp_path):
        runner = FakeRunner([1.0] * 5)
        lr_sweep(tiny_config_factory(epochs=8), lrs=LRS, runner=runner, run_dir=tmp_path)
        configs = [config for config, _ in runner.calls]
        assert [c.lr for c in configs] == LRS
        assert {c.epochs for c in configs} == {2}
        assert [c.experiment_id for c in configs] == [f"tiny-lr{i}" for i in range(5)]
        assert [run_dir for _, run_dir in runner.calls] == [tmp_path / f"lr{i}" for i in range(5)]

    def test_diverged_runs_are_excluded(self, tiny_config_factory, tmp_path):
        runner = FakeRunner([None, 2.0, None, 1.5, None])
        result = lr_sweep(tiny_config_factory(), lrs=LRS, runner=runner, run_dir=tmp_path)
        assert result.chosen_lr == LRS[3]
        assert result.entries[0] == (LRS[0], None)

    def test_all_runs_diverged(self, tiny_config_factory, tmp_path):
        with pytest.raises(SweepFailureError):
            lr_sweep(tiny_config_factory(), lrs=LRS, runner=FakeRunner([None] * 5), run_dir=tmp_path)

    def test_real_runs(self, tiny_config_factory, tmp_path):
        result = lr_sweep(tiny_config_factory(epochs=1), lrs=[1e-3, 3e-3, 1e-2, 3e-2, 1e-1], run_dir=tmp_path)
        assert result.chosen_lr in (1e-3, 3e-3, 1e-2, 3e-2, 1e-1)
        assert len(result.summaries) == 5
        assert (tmp_path / "lr0" / "log.csv").exists()
        assert not (tmp_path / "lr0" / "seed_0").exists()
