"""
Tests for the numerical kernels: convolution, normalization, elementwise ops and losses.
"""
import math

import numpy as np
import pytest

from guidance_lab.domain.exceptions import DegenerateBatchError, GuidanceLabError, LabelError, ShapeError
from guidance_lab.domain.value_objects import NormMode
from guidance_lab.shared.core import (
    Tensor,
    apply_elementwise,
    batch_norm,
    bce_with_logits,
    concat,
    conv2d,
    embedding,
    layer_norm,
    mse_loss,
    softmax,
    softmax_cross_entropy,
    stack,
)


class TestConv2d:

    def test_identity_kernel(self):
        x = Tensor(np.arange(9, dtype=np.float32).reshape(1, 1, 3, 3))
        out = conv2d(x, Tensor(np.ones((1, 1, 1, 1))))
        np.testing.assert_array_equal(out.data, x.data)

    def test_hand_computed_sum(self):
        x = Tensor(np.array([[[[1.0, 2.0], [3.0, 4.0]]]]))
        out = conv2d(x, Tensor(np.ones((1, 1, 2, 2))))
        np.testing.assert_allclose(out.data, [[[[10.0]]]])

    def test_output_shape_with_stride_and_padding(self):
        out = conv2d(Tensor(np.ones((2, 3, 7, 7))), Tensor(np.ones((4, 3, 3, 3))), stride=2, padding=1)
        assert out.shape == (2, 4, 4, 4)

    def test_channel_mismatch(self):
        with pytest.raises(ShapeError):
            conv2d(Tensor(np.ones((1, 2, 4, 4))), Tensor(np.ones((1, 3, 3, 3))))

    def test_kernel_larger_than_input(self):
        with pytest.raises(ShapeError):
            conv2d(Tensor(np.ones((1, 1, 2, 2))), Tensor(np.ones((1, 1, 3, 3))))

    @pytest.mark.parametrize("stride,padding", [(1, 0), (1, 1), (2, 1)])
    def test_grad_matches_finite_differences(self, float64, rng_factory, grad_check, stride, padding):
        rng = rng_factory(4)
        x = Tensor(rng.standard_normal((1, 2, 5, 5)), requires_grad=True)
        k = Tensor(rng.standard_normal((3, 2, 3, 3)), requires_grad=True)
        b = Tensor(rng.standard_normal(3), requires_grad=True)
        weights = rng.standard_normal(conv2d(x, k, b, stride, padding).shape)
        assert grad_check(lambda: (conv2d(x, k, b, stride, padding) * weights).sum(), [x, k, b]) < 1e-5


class TestNormalization:

    def test_batch_norm_constant_column_is_zero(self):
        x = Tensor(np.column_stack([np.full(4, 3.0), np.arange(4.0)]))
        out = batch_norm(x, Tensor(np.ones(2)), Tensor(np.zeros(2)), np.zeros(2), np.ones(2))
        np.testing.assert_allclose(out.data[:, 0], 0.0, atol=1e-6)

    def test_batch_norm_standardized_input_unchanged(self, float64):
        x = np.array([[-1.0, 1.0], [1.0, -1.0], [-1.0, -1.0], [1.0, 1.0]])
        out = batch_norm(Tensor(x), Tensor(np.ones(2)), Tensor(np.zeros(2)), np.zeros(2), np.ones(2))
        np.testing.assert_allclose(out.data, x, atol=1e-3)

    def test_batch_norm_running_stats_only_update_in_train(self, float64):
        x = Tensor(np.array([[1.0], [3.0]]))
        gamma, beta = Tensor(np.ones(1)), Tensor(np.zeros(1))
        mean, var = np.zeros(1), np.ones(1)
        batch_norm(x, gamma, beta, mean, var, mode=NormMode.FROZEN)
        batch_norm(x, gamma, beta, mean, var, mode=NormMode.EVAL)
        np.testing.assert_array_equal(mean, [0.0])
        batch_norm(x, gamma, beta, mean, var, mode=NormMode.TRAIN, momentum=0.5)
        assert mean[0] == pytest.approx(1.0)
        assert var[0] == pytest.approx(0.5 * 1.0 + 0.5 * 2.0)

    def test_batch_norm_eval_uses_running_stats(self, float64):
        out = batch_norm(Tensor(np.array([[5.0]])), Tensor(np.ones(1)), Tensor(np.zeros(1)),
                         np.array([1.0]), np.array([4.0]), mode=NormMode.EVAL, eps=0.0)
        assert out.data[0, 0] == pytest.approx(2.0)

    def test_batch_norm_needs_two_samples(self):
        with pytest.raises(DegenerateBatchError):
            batch_norm(Tensor(np.ones((1, 3))), Tensor(np.ones(3)), Tensor(np.zeros(3)), np.zeros(3), np.ones(3))

    def test_batch_norm_grad(self, float64, rng_factory, grad_check):
        rng = rng_factory(5)
        x = Tensor(rng.standard_normal((8, 4)), requires_grad=True)
        gamma = Tensor(rng.uniform(0.5, 1.5, size=4), requires_grad=True)
        beta = Tensor(rng.standard_normal(4), requires_grad=True)
        weights = rng.standard_normal((8, 4))
        mean, var = np.zeros(4), np.ones(4)

        def loss():
            return (batch_norm(x, gamma, beta, mean, var, mode=NormMode.FROZEN) * weights).sum()

        assert grad_check(loss, [x, gamma, beta]) < 1e-5

    def test_batch_norm_4d_grad(self, float64, rng_factory, grad_check):
        rng = rng_factory(6)
        x = Tensor(rng.standard_normal((3, 2, 3, 3)), requires_grad=True)
        gamma, beta = Tensor(np.ones(2), requires_grad=True), Tensor(np.zeros(2), requires_grad=True)
        weights = rng.standard_normal((3, 2, 3, 3))
        mean, var = np.zeros(2), np.ones(2)

        def loss():
            return (batch_norm(x, gamma, beta, mean, var, mode=NormMode.FROZEN) * weights).sum()

        assert grad_check(loss, [x, gamma, beta]) < 1e-5

    def test_layer_norm_unit_row(self, float64):
        out = layer_norm(Tensor(np.array([[1.0, -1.0]])), Tensor(np.ones(2)), Tensor(np.zeros(2)))
        np.testing.assert_allclose(out.data, [[1.0, -1.0]], atol=1e-4)

    def test_layer_norm_constant_row(self):
        out = layer_norm(Tensor(np.full((2, 5), 7.0)), Tensor(np.ones(5)), Tensor(np.zeros(5)))
        np.testing.assert_allclose(out.data, 0.0, atol=1e-6)

    def test_layer_norm_grad(self, float64, rng_factory, grad_check):
        rng = rng_factory(7)
        x = Tensor(rng.standard_normal((4, 8)), requires_grad=True)
        gamma = Tensor(rng.uniform(0.5, 1.5, size=8), requires_grad=True)
        beta = Tensor(rng.standard_normal(8), requires_grad=True)
        weights = rng.standard_normal((4, 8))
        assert grad_check(lambda: (layer_norm(x, gamma, beta) * weights).sum(), [x, gamma, beta]) < 1e-5


class TestElementwise:

    def test_relu(self):
        np.testing.assert_array_equal(apply_elementwise("relu", Tensor([-1.0, 0.0, 2.0])).data, [0.0, 0.0, 2.0])

    def test_tanh_zero(self):
        assert apply_elementwise("tanh", Tensor(0.0)).item() == 0.0

    def test_sigmoid_zero(self):
        assert apply_elementwise("sigmoid", Tensor(0.0)).item() == pytest.approx(0.5)

    def test_scale_add_mul(self):
        x = Tensor([1.0, 2.0])
        np.testing.assert_allclose(apply_elementwise("scale", x, 3).data, [3.0, 6.0])
        np.testing.assert_allclose(apply_elementwise("add", x, 1.0).data, [2.0, 3.0])
        np.testing.assert_allclose(apply_elementwise("mul", x, x).data, [1.0, 4.0])

    def test_unknown_op(self):
        with pytest.raises(GuidanceLabError):
            apply_elementwise("gelu", Tensor(1.0))

    def test_softmax_rows_sum_to_one(self):
        out = softmax(Tensor(np.array([[1.0, 2.0, 3.0], [0.0, 0.0, 1000.0]])))
        np.testing.assert_allclose(out.data.sum(axis=1), 1.0, rtol=1e-6)


class TestLosses:

    def test_cross_entropy_uniform_logits(self):
        loss = softmax_cross_entropy(Tensor(np.zeros((4, 10))), [0, 3, 5, 9])
        assert loss.item() == pytest.approx(math.log(10), abs=1e-6)

    def test_cross_entropy_large_margin(self):
        logits = np.zeros((2, 3))
        logits[0, 1] = logits[1, 2] = 20.0
        assert softmax_cross_entropy(Tensor(logits), [1, 2]).item() < 1e-3

    def test_cross_entropy_ignores_masked_positions(self):
        logits = Tensor(np.array([[[0.0, 0.0], [5.0, -5.0]]]))
        masked = softmax_cross_entropy(logits, [[-100, 0]])
        direct = softmax_cross_entropy(Tensor(np.array([[5.0, -5.0]])), [0])
        assert masked.item() == pytest.approx(direct.item())

    def test_cross_entropy_label_out_of_range(self):
        with pytest.raises(LabelError):
            softmax_cross_entropy(Tensor(np.zeros((2, 3))), [0, 3])

    def test_cross_entropy_all_ignored(self):
        with pytest.raises(LabelError):
            softmax_cross_entropy(Tensor(np.zeros((2, 3))), [-100, -100])

    def test_cross_entropy_grad(self, float64, rng_factory, grad_check):
        logits = Tensor(rng_factory(8).standard_normal((4, 5)), requires_grad=True)
        assert grad_check(lambda: softmax_cross_entropy(logits, [0, 4, 2, 2]), [logits]) < 1e-6

    def test_mse_values(self):
        pred = Tensor(np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert mse_loss(pred, pred.data).item() == 0.0
        assert mse_loss(pred, pred.data - 1.0).item() == pytest.approx(1.0)

    def test_mse_gradient_is_two_diff_over_n(self, float64):
        pred = Tensor(np.array([1.0, 2.0, 4.0, 0.0]), requires_grad=True)
        target = np.array([0.0, 2.0, 1.0, 1.0])
        mse_loss(pred, target).backward()
        np.testing.assert_allclose(pred.grad, 2 * (pred.data - target) / 4)

    def test_mse_shape_mismatch(self):
        with pytest.raises(ShapeError):
            mse_loss(Tensor(np.ones(3)), np.ones(4))

    def test_bce_zero_logits(self):
        assert bce_with_logits(Tensor(np.zeros(4)), [0, 1, 1, 0]).item() == pytest.approx(math.log(2), abs=1e-6)

    def test_bce_grad(self, float64, rng_factory, grad_check):
        logits = Tensor(rng_factory(9).standard_normal(6), requires_grad=True)
        assert grad_check(lambda: bce_with_logits(logits, [0, 1, 1, 0, 1, 0]), [logits]) < 1e-6


class TestIndexingAndJoining:

    def test_embedding_out_of_range(self):
        with pytest.raises(LabelError):
            embedding(Tensor(np.ones((4, 2))), [[0, 4]])

    def test_embedding_rows(self):
        weight = Tensor(np.arange(8, dtype=np.float32).reshape(4, 2))
        np.testing.assert_array_equal(embedding(weight, [[3, 0]]).data, [[[6.0, 7.0], [0.0, 1.0]]])

    def test_concat_and_stack_grad(self, float64, rng_factory, grad_check):
        rng = rng_factory(10)
        a = Tensor(rng.standard_normal((2, 3)), requires_grad=True)
        b = Tensor(rng.standard_normal((2, 3)), requires_grad=True)
        w = rng.standard_normal((2, 2, 3))
        assert grad_check(lambda: (stack([a, b], axis=1) * w).sum() + (concat([a, b], axis=0) ** 2.0).sum(), [a, b]) < 1e-6

    def test_stack_shape_mismatch(self):
        with pytest.raises(ShapeError):
            stack([Tensor(np.ones(2)), Tensor(np.ones(3))])
