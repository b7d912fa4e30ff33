"""
Reverse-mode automatic differentiation over numpy arrays.

A ``Tensor`` wraps a dense numpy array. Operations on tensors that require
gradients record their inputs and an adjoint closure; ``backward`` sorts the
recorded graph topologically (``GradTape``) and replays the adjoints in
reverse, accumulating into the ``grad`` of every leaf.

Every operation checks its output for NaN/Inf and raises ``NonFiniteError``
instead of letting non-finite values propagate.
"""
from __future__ import annotations

from contextlib import contextmanager
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from guidance_lab.domain.exceptions import (
    NoTapeError,
    NonFiniteError,
    NonFiniteGradientError,
    RankError,
    ShapeError,
)

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_STATE: Dict[str, Any] = {"grad_enabled": True, "dtype": np.dtype(np.float32)}


# ============================================================================
# GLOBAL SWITCHES
# ============================================================================

def is_grad_enabled() -> bool:
    return _STATE["grad_enabled"]


@contextmanager
def no_grad():
    """Disable graph recording; results of operations never require grad."""
    previous = _STATE["grad_enabled"]
    _STATE["grad_enabled"] = False
    try:
        yield
    finally:
        _STATE["grad_enabled"] = previous


def get_default_dtype() -> np.dtype:
    return _STATE["dtype"]


@contextmanager
def default_dtype(dtype: Any):
    """
    Temporarily change the dtype of newly created tensors.

    Usage:
        with default_dtype(np.float64):
            x = Tensor([[1.0, 2.0]], requires_grad=True)
    """
    previous = _STATE["dtype"]
    _STATE["dtype"] = np.dtype(dtype)
    try:
        yield
    finally:
        _STATE["dtype"] = previous


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` over the axes that broadcasting added or stretched."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op: str, a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[int, ...]:
    try:
        return tuple(np.broadcast_shapes(a, b))
    except ValueError as exc:
        raise ShapeError(f"{op}: shapes are not broadcast-compatible", details={"a": a, "b": b}) from exc


# ============================================================================
# TENSOR
# ============================================================================

class Tensor:
    """
    Dense n-dimensional array participating in a reverse-mode graph.

    Leaves are created directly (parameters, inputs); interior nodes are
    created by operations via ``Tensor.from_op``. ``grad`` is only populated
    on leaves that require gradients.
    """

    __array_priority__ = 1000

    def __init__(
        self,
        data: Any,
        requires_grad: bool = False,
        *,
        dtype: Any = None,
        name: Optional[str] = None,
    ) -> None:
        if isinstance(data, Tensor):
            data = data.data
        self.data: np.ndarray = np.asarray(data, dtype=dtype or get_default_dtype())
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._parents: Tuple[Tensor, ...] = ()
        self._backward_fn: Optional[BackwardFn] = None
        self._op: Optional[str] = None

    @classmethod
    def from_op(
        cls,
        data: np.ndarray,
        parents: Sequence["Tensor"],
        backward_fn: BackwardFn,
        op: str,
    ) -> "Tensor":
        """Record the result of an operation on ``parents``."""
        dtype = np.result_type(*[p.data.dtype for p in parents]) if parents else get_default_dtype()
        data = np.asarray(data).astype(dtype, copy=False)
        if not np.all(np.isfinite(data)):
            raise NonFiniteError(
                f"{op} produced non-finite values",
                details={"op": op, "shape": data.shape},
            )
        out = cls.__new__(cls)
        out.data = data
        out.grad = None
        out.name = None
        out._op = op
        out.requires_grad = is_grad_enabled() and any(p.requires_grad for p in parents)
        if out.requires_grad:
            out._parents = tuple(parents)
            out._backward_fn = backward_fn
        else:
            out._parents = ()
            out._backward_fn = None
        return out

    # ---------------------------------------------------------------- basics

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def is_leaf(self) -> bool:
        return self._backward_fn is None

    def __len__(self) -> int:
        return self.data.shape[0]

    def __repr__(self) -> str:
        grad = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{grad})"

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def detach(self) -> "Tensor":
        """A leaf sharing this tensor's data and recording nothing."""
        return Tensor(self.data, dtype=self.data.dtype)

    def backward(self) -> None:
        backward(self)

    def _lift(self, other: Any) -> "Tensor":
        if isinstance(other, Tensor):
            return other
        return Tensor(other, dtype=self.data.dtype)

    # ---------------------------------------------------------------- arithmetic

    def __add__(self, other: Any) -> "Tensor":
        other = self._lift(other)
        _broadcast_shape("add", self.shape, other.shape)
        a, b = self, other

        def _backward(g):
            return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

        return Tensor.from_op(a.data + b.data, (a, b), _backward, "add")

    def __radd__(self, other: Any) -> "Tensor":
        return self._lift(other) + self

    def __neg__(self) -> "Tensor":
        return Tensor.from_op(-self.data, (self,), lambda g: (-g,), "neg")

    def __sub__(self, other: Any) -> "Tensor":
        return self + (-self._lift(other))

    def __rsub__(self, other: Any) -> "Tensor":
        return self._lift(other) + (-self)

    def __mul__(self, other: Any) -> "Tensor":
        other = self._lift(other)
        _broadcast_shape("mul", self.shape, other.shape)
        a, b = self, other

        def _backward(g):
            return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

        return Tensor.from_op(a.data * b.data, (a, b), _backward, "mul")

    def __rmul__(self, other: Any) -> "Tensor":
        return self._lift(other) * self

    def __truediv__(self, other: Any) -> "Tensor":
        other = self._lift(other)
        _broadcast_shape("div", self.shape, other.shape)
        a, b = self, other

        def _backward(g):
            return (
                _unbroadcast(g / b.data, a.shape),
                _unbroadcast(-g * a.data / (b.data * b.data), b.shape),
            )

        return Tensor.from_op(a.data / b.data, (a, b), _backward, "div")

    def __rtruediv__(self, other: Any) -> "Tensor":
        return self._lift(other) / self

    def __pow__(self, exponent: float) -> "Tensor":
        a = self
        e = float(exponent)

        def _backward(g):
            return (g * e * np.power(a.data, e - 1.0),)

        return Tensor.from_op(np.power(a.data, e), (a,), _backward, "pow")

    def __matmul__(self, other: Any) -> "Tensor":
        return matmul(self, self._lift(other))

    def __rmatmul__(self, other: Any) -> "Tensor":
        return matmul(self._lift(other), self)

    # ---------------------------------------------------------------- unary

    def exp(self) -> "Tensor":
        out_data = np.exp(self.data)
        return Tensor.from_op(out_data, (self,), lambda g: (g * out_data,), "exp")

    def log(self) -> "Tensor":
        a = self
        return Tensor.from_op(np.log(a.data), (a,), lambda g: (g / a.data,), "log")

    def sqrt(self) -> "Tensor":
        out_data = np.sqrt(self.data)
        return Tensor.from_op(out_data, (self,), lambda g: (g * 0.5 / out_data,), "sqrt")

    def tanh(self) -> "Tensor":
        out_data = np.tanh(self.data)
        return Tensor.from_op(out_data, (self,), lambda g: (g * (1.0 - out_data * out_data),), "tanh")

    def relu(self) -> "Tensor":
        mask = self.data > 0
        return Tensor.from_op(np.where(mask, self.data, 0), (self,), lambda g: (g * mask,), "relu")

    def clip(self, low: float, high: float) -> "Tensor":
        """np.clip; the gradient passes only where the value was inside [low, high]."""
        mask = (self.data >= low) & (self.data <= high)
        return Tensor.from_op(np.clip(self.data, low, high), (self,), lambda g: (g * mask,), "clip")

    def sigmoid(self) -> "Tensor":
        out_data = 0.5 * (1.0 + np.tanh(0.5 * self.data))
        return Tensor.from_op(out_data, (self,), lambda g: (g * out_data * (1.0 - out_data),), "sigmoid")

    # ---------------------------------------------------------------- reductions

    def sum(self, axis: Any = None, keepdims: bool = False) -> "Tensor":
        a = self

        def _backward(g):
            if axis is not None and not keepdims:
                axes = (axis,) if isinstance(axis, int) else tuple(axis)
                axes = tuple(ax % a.ndim for ax in axes)
                g = np.expand_dims(g, axes)
            return (np.broadcast_to(g, a.shape),)

        return Tensor.from_op(a.data.sum(axis=axis, keepdims=keepdims), (a,), _backward, "sum")

    def mean(self, axis: Any = None, keepdims: bool = False) -> "Tensor":
        if axis is None:
            count = self.data.size
        else:
            axes = (axis,) if isinstance(axis, int) else tuple(axis)
            count = int(np.prod([self.shape[ax] for ax in axes]))
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    # ---------------------------------------------------------------- shape

    def reshape(self, *shape: Any) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        original = self.shape
        return Tensor.from_op(self.data.reshape(shape), (self,), lambda g: (g.reshape(original),), "reshape")

    def transpose(self, *axes: int) -> "Tensor":
        axes = tuple(axes) if axes else tuple(reversed(range(self.ndim)))
        inverse = tuple(np.argsort(axes))
        return Tensor.from_op(self.data.transpose(axes), (self,), lambda g: (g.transpose(inverse),), "transpose")

    def swapaxes(self, axis1: int, axis2: int) -> "Tensor":
        return Tensor.from_op(
            np.swapaxes(self.data, axis1, axis2),
            (self,),
            lambda g: (np.swapaxes(g, axis1, axis2),),
            "swapaxes",
        )

    @property
    def T(self) -> "Tensor":
        return self.transpose()

    def __getitem__(self, index: Any) -> "Tensor":
        a = self

        def _backward(g):
            full = np.zeros_like(a.data)
            np.add.at(full, index, g)
            return (full,)

        return Tensor.from_op(a.data[index], (a,), _backward, "getitem")


def as_tensor(value: Any, dtype: Any = None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value, dtype=dtype)


# ============================================================================
# MATMUL
# ============================================================================

def matmul(a: Tensor, b: Tensor) -> Tensor:
    """
    Matrix product with numpy batch broadcasting over leading axes.

    Adjoints: dA = G·Bᵀ, dB = Aᵀ·G (summed back over broadcast batch axes).
    """
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError("matmul needs operands of rank >= 2", details={"a": a.shape, "b": b.shape})
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError("matmul inner dimensions differ", details={"a": a.shape, "b": b.shape})

    def _backward(g):
        grad_a = np.matmul(g, np.swapaxes(b.data, -1, -2))
        grad_b = np.matmul(np.swapaxes(a.data, -1, -2), g)
        return _unbroadcast(grad_a, a.shape), _unbroadcast(grad_b, b.shape)

    return Tensor.from_op(np.matmul(a.data, b.data), (a, b), _backward, "matmul")


# ============================================================================
# GRAD TAPE / BACKWARD
# ============================================================================

class GradTape:
    """
    Operations reachable from ``root`` in topological order.

    Every node appears after all nodes producing its inputs; ``replay``
    visits each node exactly once, in reverse order.
    """

    def __init__(self, root: Tensor) -> None:
        self.root = root
        self.nodes: Tuple[Tensor, ...] = tuple(self._toposort(root))

    @staticmethod
    def _toposort(root: Tensor) -> List[Tensor]:
        order: List[Tensor] = []
        visited = set()
        stack: List[Tuple[Tensor, bool]] = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in visited:
                    stack.append((parent, False))
        return order

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self) -> Iterator[Tensor]:
        return iter(self.nodes)

    def leaves(self) -> List[Tensor]:
        return [node for node in self.nodes if node.is_leaf and node.requires_grad]

    def replay(self, seed: np.ndarray) -> None:
        grads: Dict[int, np.ndarray] = {id(self.root): seed}
        for node in reversed(self.nodes):
            g = grads.pop(id(node), None)
            if node.is_leaf:
                if not node.requires_grad:
                    continue
                if g is None:
                    g = np.zeros_like(node.data)
                g = np.asarray(g, dtype=node.data.dtype)
                node.grad = g.copy() if node.grad is None else node.grad + g
                continue
            if g is None:
                continue
            parent_grads = node._backward_fn(g)
            for parent, parent_grad in zip(node._parents, parent_grads):
                if parent_grad is None or not parent.requires_grad:
                    continue
                if not np.all(np.isfinite(parent_grad)):
                    raise NonFiniteGradientError(
                        f"adjoint of {node._op} is non-finite",
                        details={"op": node._op, "shape": parent.shape},
                    )
                key = id(parent)
                grads[key] = parent_grad if key not in grads else grads[key] + parent_grad


def backward(loss: Tensor) -> None:
    """
    Populate ``grad`` on every leaf reachable from the scalar ``loss``.

    Gradients accumulate across calls; use ``zero_grads`` between steps.
    """
    if loss.size != 1:
        raise RankError("backward needs a scalar loss", details={"shape": loss.shape})
    if not loss.requires_grad:
        raise NoTapeError("loss is not attached to a recorded graph")
    GradTape(loss).replay(np.ones_like(loss.data))


def zero_grads(params: Iterable[Tensor]) -> None:
    for param in params:
        param.grad = None
