"""
Reverse-mode differentiation over numpy arrays.

Each Tensor remembers its parents and a closure that pushes its gradient
back to them; backward() runs the closures in reverse topological order.
"""

from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

LEAKY_SLOPE = 0.3

Operand = Union['Tensor', float, np.ndarray]


class Tensor:
    """An array node in the computation graph."""

    def __init__(self, data, parents: Tuple['Tensor', ...] = (), requires_grad: bool = False,
                 name: Optional[str] = None, op: str = ''):
        self.data = np.asarray(data, dtype=np.float64)
        self.parents = parents
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self.op = op
        self._backward: Callable[[], None] = lambda: None

    def __repr__(self) -> str:
        label = self.name or self.op or 'tensor'
        return f"Tensor({label}, shape={self.shape})"

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        self.grad = None

    def _accumulate(self, grad: np.ndarray) -> None:
        if not self.requires_grad:
            return
        grad = _unbroadcast(grad, self.data.shape)
        self.grad = grad.copy() if self.grad is None else self.grad + grad

    def backward(self, grad: Optional[np.ndarray] = None) -> None:
        """Propagate d(self)/d(node) into every node that requires a gradient."""
        order: List[Tensor] = []
        seen = set()
        stack: List[Tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node.parents:
                if id(parent) not in seen:
                    stack.append((parent, False))

        self.grad = np.ones_like(self.data) if grad is None else np.asarray(grad, dtype=np.float64)
        for node in reversed(order):
            node._backward()

    # operator sugar
    def __add__(self, other: Operand) -> 'Tensor':
        return add(self, other)

    def __radd__(self, other: Operand) -> 'Tensor':
        return add(other, self)

    def __sub__(self, other: Operand) -> 'Tensor':
        return sub(self, other)

    def __rsub__(self, other: Operand) -> 'Tensor':
        return sub(other, self)

    def __mul__(self, other: Operand) -> 'Tensor':
        return mul(self, other)

    def __rmul__(self, other: Operand) -> 'Tensor':
        return mul(other, self)

    def __neg__(self) -> 'Tensor':
        return mul(self, -1.0)

    def __matmul__(self, other: 'Tensor') -> 'Tensor':
        return matmul(self, other)

    def __getitem__(self, index) -> 'Tensor':
        return getitem(self, index)

    def sum(self, axis=None) -> 'Tensor':
        return tensor_sum(self, axis)

    def mean(self) -> 'Tensor':
        return mul(tensor_sum(self), 1.0 / self.data.size)

    def reshape(self, *shape) -> 'Tensor':
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)


def parameter(data, name: str) -> Tensor:
    return Tensor(data, requires_grad=True, name=name)


def as_tensor(value: Operand) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def add(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data + b.data, (a, b), op='add')

    def _backward():
        a._accumulate(out.grad)
        b._accumulate(out.grad)
    out._backward = _backward
    return out


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data - b.data, (a, b), op='sub')

    def _backward():
        a._accumulate(out.grad)
        b._accumulate(-out.grad)
    out._backward = _backward
    return out


def mul(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data * b.data, (a, b), op='mul')

    def _backward():
        a._accumulate(out.grad * b.data)
        b._accumulate(out.grad * a.data)
    out._backward = _backward
    return out


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """2D matrix product (batch, in) @ (in, out)."""
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data @ b.data, (a, b), op='matmul')

    def _backward():
        a._accumulate(out.grad @ b.data.T)
        b._accumulate(a.data.T @ out.grad)
    out._backward = _backward
    return out


def tensor_sum(a: Tensor, axis=None) -> Tensor:
    out = Tensor(a.data.sum(axis=axis), (a,), op='sum')

    def _backward():
        grad = out.grad
        if axis is not None:
            grad = np.expand_dims(grad, axis)
        a._accumulate(np.broadcast_to(grad, a.data.shape))
    out._backward = _backward
    return out


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    out = Tensor(a.data.reshape(shape), (a,), op='reshape')

    def _backward():
        a._accumulate(out.grad.reshape(a.data.shape))
    out._backward = _backward
    return out


def getitem(a: Tensor, index) -> Tensor:
    out = Tensor(a.data[index], (a,), op='getitem')

    def _backward():
        grad = np.zeros_like(a.data)
        np.add.at(grad, index, out.grad)
        a._accumulate(grad)
    out._backward = _backward
    return out


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), op='concat')
    bounds = np.cumsum([0] + [t.data.shape[axis] for t in tensors])

    def _backward():
        for t, lo, hi in zip(tensors, bounds[:-1], bounds[1:]):
            index = [slice(None)] * out.grad.ndim
            index[axis] = slice(lo, hi)
            t._accumulate(out.grad[tuple(index)])
    out._backward = _backward
    return out


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    out = Tensor(np.stack([t.data for t in tensors], axis=axis), tuple(tensors), op='stack')

    def _backward():
        for i, t in enumerate(tensors):
            t._accumulate(np.take(out.grad, i, axis=axis))
    out._backward = _backward
    return out


def _unary(a: Tensor, value: np.ndarray, local_grad: np.ndarray, op: str) -> Tensor:
    out = Tensor(value, (a,), op=op)

    def _backward():
        a._accumulate(out.grad * local_grad)
    out._backward = _backward
    return out


def square(a: Tensor) -> Tensor:
    return _unary(a, a.data ** 2, 2.0 * a.data, 'square')


def sigmoid(a: Tensor) -> Tensor:
    s = 0.5 * (1.0 + np.tanh(0.5 * a.data))
    return _unary(a, s, s * (1.0 - s), 'sigmoid')


def tanh(a: Tensor) -> Tensor:
    t = np.tanh(a.data)
    return _unary(a, t, 1.0 - t ** 2, 'tanh')


def elu(a: Tensor) -> Tensor:
    neg = np.expm1(np.minimum(a.data, 0.0))
    value = np.where(a.data > 0, a.data, neg)
    return _unary(a, value, np.where(a.data > 0, 1.0, neg + 1.0), 'elu')


def leaky_relu(a: Tensor, slope: float = LEAKY_SLOPE) -> Tensor:
    value = np.where(a.data > 0, a.data, slope * a.data)
    return _unary(a, value, np.where(a.data > 0, 1.0, slope), 'leaky_relu')


def identity(a: Tensor) -> Tensor:
    return a


ACTIVATIONS = {
    'linear': identity,
    'elu': elu,
    'leaky_relu': leaky_relu,
    'tanh': tanh,
    'sigmoid': sigmoid,
}


def _im2col(xp: np.ndarray, height: int, width: int) -> np.ndarray:
    """(N, C, H+2, W+2) padded input -> (N, C*9, H*W) patch columns."""
    n, c = xp.shape[:2]
    patches = np.stack(
        [xp[:, :, di:di + height, dj:dj + width] for di in range(3) for dj in range(3)],
        axis=2,
    )
    return patches.reshape(n, c * 9, height * width)


def conv2d(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """
    3x3 convolution, stride 1, 'same' zero padding.

    Args:
        x: (N, C, H, W)
        weight: (O, C, 3, 3)
        bias: (O,)

    Returns:
        (N, O, H, W)
    """
    n, c, h, w = x.data.shape
    o = weight.data.shape[0]
    xp = np.pad(x.data, ((0, 0), (0, 0), (1, 1), (1, 1)))
    cols = _im2col(xp, h, w)
    wmat = weight.data.reshape(o, c * 9)
    value = (wmat @ cols + bias.data[None, :, None]).reshape(n, o, h, w)
    out = Tensor(value, (x, weight, bias), op='conv2d')

    def _backward():
        g = out.grad.reshape(n, o, h * w)
        weight._accumulate(np.einsum('nop,nkp->ok', g, cols).reshape(weight.data.shape))
        bias._accumulate(g.sum(axis=(0, 2)))
        if x.requires_grad:
            dcols = (wmat.T @ g).reshape(n, c, 9, h, w)
            dxp = np.zeros_like(xp)
            for k in range(9):
                di, dj = divmod(k, 3)
                dxp[:, :, di:di + h, dj:dj + w] += dcols[:, :, k]
            x._accumulate(dxp[:, :, 1:-1, 1:-1])
    out._backward = _backward
    return out


def maxpool2d(x: Tensor) -> Tensor:
    """2x2 max pooling with stride 2; the first maximum in a window takes the gradient."""
    n, c, h, w = x.data.shape
    if h % 2 or w % 2:
        raise ValueError(f"maxpool2d needs even spatial size, got {(h, w)}")
    windows = x.data.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5)
    windows = windows.reshape(n, c, h // 2, w // 2, 4)
    winner = windows.argmax(axis=-1)
    mask = np.zeros_like(windows)
    np.put_along_axis(mask, winner[..., None], 1.0, axis=-1)
    out = Tensor(windows.max(axis=-1), (x,), op='maxpool2d')

    def _backward():
        g = (out.grad[..., None] * mask).reshape(n, c, h // 2, w // 2, 2, 2)
        x._accumulate(g.transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h, w))
    out._backward = _backward
    return out


def upsample2d(x: Tensor) -> Tensor:
    """Nearest-neighbour 2x up-sampling."""
    n, c, h, w = x.data.shape
    out = Tensor(x.data.repeat(2, axis=2).repeat(2, axis=3), (x,), op='upsample2d')

    def _backward():
        x._accumulate(out.grad.reshape(n, c, h, 2, w, 2).sum(axis=(3, 5)))
    out._backward = _backward
    return out


def mse(prediction: Tensor, target: Operand) -> Tensor:
    """Mean over the batch of the squared error norm of each sample."""
    diff = sub(prediction, target)
    return mul(tensor_sum(square(diff)), 1.0 / prediction.data.shape[0])


def collect_parameters(groups: Iterable[Iterable[Tensor]]) -> List[Tensor]:
    return [p for group in groups for p in group]
