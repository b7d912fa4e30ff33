"""
Tests for the guidance loss: layer mapping, flattening, guide inputs and the
combined objective.
"""
from fractions import Fraction

import numpy as np
import pytest

from guidance_lab.application.services.guidance_service import (
    GuidanceService,
    compute_layer_mapping,
    flatten_activation,
    guide_batch,
    guided_loss,
    select_taps,
)
from guidance_lab.domain.entities import ActivationRecord, LayerMapping
from guidance_lab.domain.exceptions import ConfigError, DegenerateBatchError, ShapeError, UnsupportedMappingError
from guidance_lab.domain.value_objects import GuideInput
from guidance_lab.infrastructure.config import NetworkSpec
from guidance_lab.infrastructure.datasets import Batch
from guidance_lab.infrastructure.metrics import get_metric
from guidance_lab.infrastructure.networks import build_network
from guidance_lab.shared.core import RngState, Tensor, backward


def fcn(depth: int, **overrides) -> NetworkSpec:
    fields = {"family": "fcn", "depth": depth, "width": 6, "classes": 3, "input_shape": [4]}
    fields.update(overrides)
    return NetworkSpec(**fields)


class TestLayerMapping:

    @pytest.mark.parametrize("t,l,expected", [
        (4, 2, ((0, 0), (1, 3))),
        (5, 5, ((0, 0), (1, 1), (2, 2), (3, 3), (4, 4))),
        (7, 1, ((0, 6),)),
        (5, 3, ((0, 0), (1, 2), (2, 4))),
        (4, 3, ((0, 0), (1, 2), (2, 3))),
    ])
    def test_pairs(self, t, l, expected):
        assert compute_layer_mapping(t, l).pairs == expected

    def test_step(self):
        assert compute_layer_mapping(7, 3).step == Fraction(3)

    def test_endpoints_and_monotone(self):
        for t in range(1, 12):
            for l in range(1, t + 1):
                targets = compute_layer_mapping(t, l).target_indices()
                assert targets[-1] == t - 1
                assert list(targets) == sorted(targets)
                if l > 1:
                    assert targets[0] == 0

    def test_matches_rounded_enumeration(self):
        for t in range(1, 13):
            for l in range(1, t + 1):
                if l == 1:
                    expected = ((0, t - 1),)
                else:
                    expected = tuple(
                        (i, int(Fraction(i * (t - 1), l - 1) + Fraction(1, 2))) for i in range(l)
                    )
                assert compute_layer_mapping(t, l).pairs == expected, (t, l)

    def test_more_guide_taps_than_target(self):
        with pytest.raises(UnsupportedMappingError):
            compute_layer_mapping(2, 3)

    def test_empty_mapping(self):
        assert LayerMapping.empty().is_empty

    def test_invalid_pairs_rejected(self):
        with pytest.raises(UnsupportedMappingError):
            LayerMapping(t=3, l=2, pairs=((0, 2), (1, 1)))


class TestFlattenActivation:

    def test_image_activation(self):
        assert flatten_activation(np.ones((2, 3, 4, 4))).values.shape == (2, 48)

    def test_sequence_activation(self):
        assert flatten_activation(np.ones((2, 5, 8))).values.shape == (2, 40)

    def test_padded_positions_zeroed(self):
        mask = np.array([[True, False], [True, True]])
        flat = flatten_activation(np.ones((2, 2, 3)), mask).values.data
        np.testing.assert_array_equal(flat[0], [1, 1, 1, 0, 0, 0])
        np.testing.assert_array_equal(flat[1], np.ones(6))

    def test_mask_shape_mismatch(self):
        with pytest.raises(ShapeError):
            flatten_activation(np.ones((2, 3, 4)), np.ones((2, 2), dtype=bool))

    def test_vector_rejected(self):
        with pytest.raises(ShapeError):
            flatten_activation(np.ones(5))


class TestGuideBatch:

    def test_same_returns_batch(self):
        batch = Batch(np.ones((3, 4)), np.zeros(3), None, ("a", "b", "c"))
        assert guide_batch(batch, GuideInput.SAME) is batch

    def test_noise_images_keep_shape(self):
        batch = Batch(np.ones((3, 1, 4, 4), dtype=np.float32), np.zeros(3), None, ("a", "b", "c"))
        noisy = guide_batch(batch, GuideInput.NOISE, RngState(0))
        assert noisy.inputs.shape == (3, 1, 4, 4)
        assert not np.array_equal(noisy.inputs, batch.inputs)
        np.testing.assert_array_equal(noisy.targets, batch.targets)

    def test_noise_tokens_stay_in_vocab(self):
        tokens = np.ones((4, 6), dtype=np.int64)
        noisy = guide_batch(tokens, GuideInput.NOISE, RngState(1), token_vocab=5)
        assert noisy.shape == (4, 6)
        assert np.issubdtype(noisy.dtype, np.integer)
        assert noisy.min() >= 0 and noisy.max() < 5

    def test_noise_needs_rng(self):
        with pytest.raises(ConfigError):
            guide_batch(np.ones((3, 2)), GuideInput.NOISE)

    def test_noise_tokens_need_vocab(self):
        with pytest.raises(ConfigError):
            guide_batch(np.ones((3, 2), dtype=np.int64), GuideInput.NOISE, RngState(0))

    def test_noise_images_are_standard_normal(self):
        batch = Batch(np.ones((64, 3, 16, 16), dtype=np.float32), np.zeros(64), None, tuple(range(64)))
        noise = guide_batch(batch, GuideInput.NOISE, RngState(7)).inputs
        assert noise.shape == (64, 3, 16, 16)
        assert abs(float(noise.mean())) < 0.05
        assert 0.95 < float(noise.std()) < 1.05

    def test_noise_ignores_input_values(self):
        """Test NaN or arbitrary inputs give the same draws for the same seed"""
        shape = (64, 3, 16, 16)
        nan_inputs = np.full(shape, np.nan, dtype=np.float32)
        other_inputs = np.arange(np.prod(shape), dtype=np.float32).reshape(shape)
        first = guide_batch(nan_inputs, GuideInput.NOISE, RngState(7))
        second = guide_batch(other_inputs, GuideInput.NOISE, RngState(7))
        assert np.isfinite(first).all()
        np.testing.assert_array_equal(first, second)


class TestGuidedLoss:

    def test_oracle_total(self, float64):
        target = Tensor([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]], requires_grad=True)
        guide = Tensor([[1.0], [2.0], [3.0]])
        breakdown = guided_loss(
            Tensor(2.0),
            ActivationRecord((("head", target),)),
            ActivationRecord((("head", guide),)),
            compute_layer_mapping(1, 1),
            get_metric("cka"),
        )
        assert breakdown.dissimilarity_value == pytest.approx(0.52566, abs=1e-5)
        assert breakdown.total_value == pytest.approx(2.52566, abs=1e-5)
        assert breakdown.per_layer_values()[0][0] == (0, 0)

    def test_empty_mapping_is_task_loss(self):
        task = Tensor(1.5)
        breakdown = guided_loss(task, ActivationRecord(), ActivationRecord(), LayerMapping.empty(), get_metric("cka"))
        assert breakdown.total is task
        assert breakdown.dissimilarity_value == 0.0

    def test_guide_receives_no_gradient(self, float64, rng_factory):
        rng = rng_factory(0)
        target = Tensor(rng.standard_normal((5, 3)), requires_grad=True)
        guide = Tensor(rng.standard_normal((5, 2)), requires_grad=True)
        breakdown = guided_loss(
            (target * target).mean(),
            ActivationRecord((("t", target),)),
            ActivationRecord((("g", guide),)),
            compute_layer_mapping(1, 1),
            get_metric("rsa"),
        )
        backward(breakdown.total)
        assert target.grad is not None
        assert guide.grad is None

    def test_sums_every_mapped_pair(self, float64, rng_factory):
        rng = rng_factory(1)
        targets = [Tensor(rng.standard_normal((6, 4))) for _ in range(4)]
        guides = [Tensor(rng.standard_normal((6, 3))) for _ in range(2)]
        metric = get_metric("cka")
        breakdown = guided_loss(
            Tensor(0.0),
            ActivationRecord(tuple((f"t{i}", x) for i, x in enumerate(targets))),
            ActivationRecord(tuple((f"g{i}", x) for i, x in enumerate(guides))),
            compute_layer_mapping(4, 2),
            metric,
        )
        expected = (metric.dissimilarity(flatten_activation(targets[0]), flatten_activation(guides[0])).item()
                    + metric.dissimilarity(flatten_activation(targets[3]), flatten_activation(guides[1])).item())
        assert breakdown.dissimilarity_value == pytest.approx(expected, abs=1e-9)
        assert [pair for pair, _ in breakdown.per_layer] == [(0, 0), (1, 3)]

    def test_record_must_match_mapping(self):
        record = ActivationRecord((("a", np.ones((3, 2))),))
        with pytest.raises(ShapeError):
            guided_loss(Tensor(0.0), record, record, compute_layer_mapping(2, 1), get_metric("cka"))

    def test_small_batch_rejected(self, rng_factory):
        rng = rng_factory(2)
        target = ActivationRecord((("a", rng.standard_normal((2, 3))),))
        guide = ActivationRecord((("b", rng.standard_normal((2, 3))),))
        with pytest.raises(DegenerateBatchError):
            guided_loss(Tensor(0.0), target, guide, compute_layer_mapping(1, 1), get_metric("cka"))


class TestGuidanceService:

    def test_mapping_from_networks(self):
        guide = build_network(fcn(1), RngState(1)).freeze()
        service = GuidanceService(guide, target_taps=4)
        assert service.enabled
        assert service.mapping.pairs == ((0, 0), (1, 3))

    def test_disabled_without_guide(self):
        service = GuidanceService(None, target_taps=3)
        assert not service.enabled
        assert not service.is_active(1)

    def test_disconnect_boundary(self):
        guide = build_network(fcn(1), RngState(1)).freeze()
        service = GuidanceService(guide, target_taps=3, disconnect_after_steps=150)
        assert service.is_active(1)
        assert service.is_active(150)
        assert not service.is_active(151)

    def test_loss_switches_off_after_disconnect(self, rng_factory):
        target = build_network(fcn(2), RngState(0))
        guide = build_network(fcn(1), RngState(1)).freeze()
        service = GuidanceService(guide, len(target.tap_list), disconnect_after_steps=1)
        x = rng_factory(3).standard_normal((8, 4))
        logits, record = target.forward_with_taps(x)
        task = logits.mean()
        active = service.loss(task, record, x, step=1)
        inactive = service.loss(task, record, x, step=2)
        assert active.dissimilarity_value > 0.0
        assert inactive.dissimilarity_value == 0.0
        assert inactive.total is task

    def test_guide_forward_records_no_graph(self, rng_factory):
        guide = build_network(fcn(1), RngState(1)).freeze()
        service = GuidanceService(guide, target_taps=3, guide_input="noise", noise_rng=RngState(4))
        record = service.guide_record(rng_factory(5).standard_normal((4, 4)))
        assert all(not activation.requires_grad for _, activation in record)

    def test_unsupported_guide_depth(self):
        guide = build_network(fcn(4), RngState(1)).freeze()
        with pytest.raises(UnsupportedMappingError):
            GuidanceService(guide, target_taps=3)

    def test_sparse_guide_taps(self, rng_factory):
        target = build_network(fcn(1), RngState(0))
        guide = build_network(fcn(3), RngState(1)).freeze()
        service = GuidanceService(guide, target.tap_list, guide_tap_names=["block2", "head"])
        assert service.guide_taps == ("block2", "head")
        assert service.mapping.pairs == ((0, 0), (1, 1))
        x = rng_factory(6).standard_normal((8, 4))
        assert service.guide_record(x).names == ("block2", "head")
        logits, record = target.forward_with_taps(x)
        assert service.loss(logits.mean(), record, x, step=1).dissimilarity_value > 0.0

    def test_sparse_target_taps(self):
        target = build_network(fcn(3), RngState(0))
        guide = build_network(fcn(1), RngState(1)).freeze()
        service = GuidanceService(guide, target.tap_list, target_tap_names=["block3", "head"])
        assert service.target_taps == ("block3", "head")
        assert service.mapping.t == 2

    def test_target_names_need_tap_list(self):
        guide = build_network(fcn(1), RngState(1)).freeze()
        with pytest.raises(ConfigError):
            GuidanceService(guide, target_taps=3, target_tap_names=["head"])


class TestSelectTaps:

    TAPS = ("block1", "block2", "head")

    def test_none_selects_every_tap(self):
        assert select_taps(self.TAPS, None, "guide") == self.TAPS

    def test_named_subset(self):
        assert select_taps(self.TAPS, ["block1", "head"], "guide") == ("block1", "head")

    def test_unknown_tap(self):
        with pytest.raises(ConfigError):
            select_taps(self.TAPS, ["block9"], "guide")

    def test_out_of_order(self):
        with pytest.raises(ConfigError):
            select_taps(self.TAPS, ["head", "block1"], "target")

    def test_record_select_keeps_order_and_mask(self):
        mask = np.ones((2, 3), dtype=bool)
        record = ActivationRecord(
            tuple((name, np.full((2, 1), i)) for i, name in enumerate(self.TAPS)), pad_mask=mask
        )
        picked = record.select(("block2", "head"))
        assert picked.names == ("block2", "head")
        assert picked.pad_mask is mask
        with pytest.raises(KeyError):
            record.select(("block9",))
