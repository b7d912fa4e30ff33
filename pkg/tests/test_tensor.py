"""
Tests for the autodiff tensor: operations, graph replay and the global switches.
"""
import numpy as np
import pytest

from guidance_lab.domain.exceptions import NoTapeError, NonFiniteError, RankError, ShapeError
from guidance_lab.shared.core import (
    GradTape,
    Tensor,
    backward,
    default_dtype,
    get_default_dtype,
    is_grad_enabled,
    matmul,
    no_grad,
    zero_grads,
)


class TestTensorBasics:
    """Construction, dtype and the no_grad switch"""

    def test_default_dtype_is_float32(self):
        assert get_default_dtype() == np.float32
        assert Tensor([1.0, 2.0]).dtype == np.float32

    def test_default_dtype_context_restores(self):
        with default_dtype(np.float64):
            assert Tensor([1.0]).dtype == np.float64
        assert Tensor([1.0]).dtype == np.float32

    def test_no_grad_results_do_not_require_grad(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with no_grad():
            assert not is_grad_enabled()
            y = x * 2.0
        assert is_grad_enabled()
        assert not y.requires_grad
        assert y.is_leaf

    def test_detach_shares_data_without_graph(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        y = (x * 3.0).detach()
        assert not y.requires_grad
        np.testing.assert_array_equal(y.data, [3.0, 6.0])

    def test_non_finite_output_raises(self):
        with np.errstate(all="ignore"):
            with pytest.raises(NonFiniteError):
                Tensor([0.0, 1.0]).log()

    def test_broadcast_mismatch_raises(self):
        with pytest.raises(ShapeError):
            Tensor(np.ones((2, 3))) + Tensor(np.ones((4,)))


class TestMatmul:
    """Matrix product and its adjoints"""

    def test_hand_computed_product(self):
        out = matmul(Tensor([[1.0, 2.0], [3.0, 4.0]]), Tensor([[5.0], [6.0]]))
        np.testing.assert_allclose(out.data, [[17.0], [39.0]])

    def test_identity(self):
        a = Tensor(np.arange(12, dtype=np.float32).reshape(3, 4))
        np.testing.assert_array_equal(matmul(Tensor(np.eye(3)), a).data, a.data)

    def test_inner_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))

    def test_rank_one_operand_rejected(self):
        with pytest.raises(ShapeError):
            matmul(Tensor(np.ones(3)), Tensor(np.ones((3, 2))))

    def test_grad_matches_finite_differences(self, float64, rng_factory, grad_check):
        rng = rng_factory(0)
        a = Tensor(rng.standard_normal((3, 2)), requires_grad=True)
        b = Tensor(rng.standard_normal((2, 2)), requires_grad=True)
        assert grad_check(lambda: (matmul(a, b) * matmul(a, b)).sum(), [a, b]) < 1e-6


class TestBackward:
    """Reverse-mode replay"""

    def test_square_gradient(self):
        x = Tensor(3.0, requires_grad=True)
        backward(x * x)
        assert x.grad == pytest.approx(6.0)

    def test_constant_loss_gives_zero_grad(self):
        x = Tensor([1.0, -2.0, 5.0], requires_grad=True)
        backward((x * 0.0).sum())
        np.testing.assert_array_equal(x.grad, np.zeros(3))

    def test_gradients_accumulate_until_zeroed(self):
        x = Tensor(2.0, requires_grad=True)
        backward(x * x)
        backward(x * x)
        assert x.grad == pytest.approx(8.0)
        zero_grads([x])
        assert x.grad is None

    def test_shared_subexpression_counted_once_per_use(self):
        x = Tensor(2.0, requires_grad=True)
        y = x * x
        backward(y + y)
        assert x.grad == pytest.approx(8.0)

    def test_add_grad_passes_upstream_unchanged(self, float64, grad_check):
        a = Tensor(np.array([[1.0, 2.0]]), requires_grad=True)
        b = Tensor(np.array([[3.0], [4.0]]), requires_grad=True)
        backward((a + b).sum())
        np.testing.assert_allclose(a.grad, [[2.0, 2.0]])
        np.testing.assert_allclose(b.grad, [[2.0], [2.0]])
        assert grad_check(lambda: ((a + b) * (a + b)).sum(), [a, b]) < 1e-6

    def test_non_scalar_loss_rejected(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with pytest.raises(RankError):
            backward(x * 2.0)

    def test_loss_without_graph_rejected(self):
        with pytest.raises(NoTapeError):
            backward(Tensor(1.0))

    def test_tape_orders_parents_first(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        y = (x * 2.0).tanh()
        loss = (y * y).sum()
        order = {id(node): i for i, node in enumerate(GradTape(loss))}
        for node in GradTape(loss):
            for parent in node._parents:
                assert order[id(parent)] < order[id(node)]
        assert GradTape(loss).leaves() == [x]

    def test_unary_ops_grad(self, float64, rng_factory, grad_check):
        x = Tensor(rng_factory(1).uniform(0.5, 2.0, size=(3, 4)), requires_grad=True)
        assert grad_check(lambda: (x.exp() + x.log() + x.sqrt() + x.tanh() + x.sigmoid()).sum(), [x]) < 1e-6
        assert grad_check(lambda: (x ** 3.0).mean(axis=1).sum(), [x]) < 1e-6

    def test_indexing_scatters_gradient(self):
        x = Tensor(np.zeros((3, 2)), requires_grad=True)
        rows = np.array([0, 0, 2])
        backward(x[rows].sum())
        np.testing.assert_array_equal(x.grad, [[2.0, 2.0], [0.0, 0.0], [1.0, 1.0]])

    def test_reshape_and_transpose_grad(self, float64, rng_factory, grad_check):
        x = Tensor(rng_factory(2).standard_normal((2, 3, 4)), requires_grad=True)
        w = Tensor(rng_factory(3).standard_normal((4, 6)), requires_grad=True)
        assert grad_check(lambda: (x.transpose(0, 2, 1).swapaxes(1, 2).reshape(6, 4) @ w).sum(), [x, w]) < 1e-6

    def test_clip_blocks_gradient_outside_range(self):
        x = Tensor([-1.0, 0.5, 3.0], requires_grad=True)
        y = x.clip(0.0, 2.0)
        np.testing.assert_array_equal(y.data, [0.0, 0.5, 2.0])
        backward(y.sum())
        np.testing.assert_array_equal(x.grad, [0.0, 1.0, 0.0])
