# src/autodiff/tensor.py
"""
numpy 기반 역전파(reverse-mode) 자동 미분 엔진.

연산은 Function 서브클래스로 정의하고, Function.apply 가 입력 텐서의 ndarray 로
forward 를 실행한 뒤 결과 Tensor 에 자신을 creator 로 기록한다.
Tensor.backward 는 그래프를 위상 정렬한 뒤 역순으로 기울기를 전파한다.
"""

import threading
from contextlib import contextmanager
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.utils.errors import InputError, ShapeError

_DEFAULT_DTYPE = np.float32
_grad_state = threading.local()

ArrayLike = Union["Tensor", np.ndarray, float, int, Sequence[float]]


def set_default_dtype(dtype) -> None:
    """새로 만드는 텐서의 기본 dtype 설정 (float32 / float64)"""
    global _DEFAULT_DTYPE
    dtype = np.dtype(dtype)
    if dtype not in (np.dtype(np.float32), np.dtype(np.float64)):
        raise InputError(f"지원하지 않는 dtype: {dtype}")
    _DEFAULT_DTYPE = dtype.type


def get_default_dtype():
    return _DEFAULT_DTYPE


def is_grad_enabled() -> bool:
    return getattr(_grad_state, "enabled", True)


@contextmanager
def no_grad():
    """테이프를 기록하지 않는 구간 (스레드별)"""
    previous = is_grad_enabled()
    _grad_state.enabled = False
    try:
        yield
    finally:
        _grad_state.enabled = previous


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """브로드캐스트된 축을 합산해 원래 모양으로 되돌린다"""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def broadcast_shapes(a: Tuple[int, ...], b: Tuple[int, ...], op: str) -> Tuple[int, ...]:
    try:
        return np.broadcast_shapes(a, b)
    except ValueError:
        raise ShapeError(f"{op}: 브로드캐스트 불가능한 모양 {a} 와 {b}") from None


class Function:
    """미분 가능한 연산의 기본 클래스"""

    def __init__(self, *inputs: "Tensor"):
        self.inputs = inputs
        self.needs_grad = tuple(t.requires_grad for t in inputs)

    def forward(self, *arrays: np.ndarray, **kwargs: Any) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        raise NotImplementedError

    @classmethod
    def apply(cls, *inputs: ArrayLike, **kwargs: Any) -> "Tensor":
        dtype = next(
            (x.dtype for x in inputs if isinstance(x, Tensor)), _DEFAULT_DTYPE
        )
        tensors = tuple(as_tensor(x, dtype=dtype) for x in inputs)
        fn = cls(*tensors)
        out = fn.forward(*(t.data for t in tensors), **kwargs)
        requires_grad = is_grad_enabled() and any(fn.needs_grad)
        return Tensor(
            out,
            requires_grad=requires_grad,
            dtype=out.dtype,
            _creator=fn if requires_grad else None,
        )


class Tensor:
    """기울기 테이프에 참여할 수 있는 n 차원 배열"""

    __array_priority__ = 100

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        dtype=None,
        _creator: Optional[Function] = None,
    ):
        if isinstance(data, Tensor):
            data = data.data
        if dtype is None:
            if isinstance(data, np.ndarray) and np.issubdtype(data.dtype, np.floating):
                dtype = data.dtype
            else:
                dtype = _DEFAULT_DTYPE
        self.data = np.asarray(data, dtype=dtype)
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self._creator = _creator

    # --- 기본 속성 ---
    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def is_leaf(self) -> bool:
        return self._creator is None

    def __len__(self) -> int:
        return len(self.data)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{flag})"

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False, dtype=self.dtype)

    def zero_grad(self) -> None:
        self.grad = None

    def _accumulate(self, grad: np.ndarray) -> None:
        grad = np.asarray(grad, dtype=self.dtype)
        if grad.shape != self.shape:
            grad = np.broadcast_to(grad, self.shape)
        if self.grad is None:
            self.grad = grad.copy()
        else:
            self.grad += grad

    # --- 역전파 ---
    def backward(self) -> None:
        """스칼라 손실에서 도달 가능한 모든 리프에 dLoss/dLeaf 를 누적"""
        if self.data.size != 1:
            raise ShapeError(f"backward 는 스칼라 손실에서만 호출 가능합니다: shape={self.shape}")
        if not self.requires_grad:
            raise InputError("requires_grad 리프에 연결되지 않은 손실입니다")

        order = self._topological_order()
        grads = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            grad = grads.pop(id(node), None)
            if grad is None:
                continue
            if node._creator is None:
                node._accumulate(grad)
                continue
            fn = node._creator
            input_grads = fn.backward(grad)
            for inp, needs, g in zip(fn.inputs, fn.needs_grad, input_grads):
                if not needs or g is None:
                    continue
                key = id(inp)
                if key in grads:
                    grads[key] = grads[key] + g
                else:
                    grads[key] = g

    def _topological_order(self) -> List["Tensor"]:
        order: List[Tensor] = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            if node._creator is not None:
                for inp in reversed(node._creator.inputs):
                    if inp.requires_grad and id(inp) not in visited:
                        stack.append((inp, False))
        return order

    # --- 연산자 ---
    def __add__(self, other: ArrayLike) -> "Tensor":
        return Add.apply(self, other)

    def __radd__(self, other: ArrayLike) -> "Tensor":
        return Add.apply(other, self)

    def __sub__(self, other: ArrayLike) -> "Tensor":
        return Sub.apply(self, other)

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return Sub.apply(as_tensor(other, dtype=self.dtype), self)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        return Mul.apply(self, other)

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        return Mul.apply(other, self)

    def __truediv__(self, other: ArrayLike) -> "Tensor":
        return Div.apply(self, other)

    def __rtruediv__(self, other: ArrayLike) -> "Tensor":
        return Div.apply(as_tensor(other, dtype=self.dtype), self)

    def __neg__(self) -> "Tensor":
        return Neg.apply(self)

    def __matmul__(self, other: ArrayLike) -> "Tensor":
        return MatMul.apply(self, other)

    def __getitem__(self, index) -> "Tensor":
        return Slice.apply(self, index=index)

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        return Sum.apply(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        return Mean.apply(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Reshape.apply(self, shape=shape)

    def broadcast_to(self, shape: Tuple[int, ...]) -> "Tensor":
        return BroadcastTo.apply(self, shape=tuple(shape))

    def cumsum(self, axis: int = -1, exclusive: bool = False) -> "Tensor":
        return CumSum.apply(self, axis=axis, exclusive=exclusive)

    def exp(self) -> "Tensor":
        return Exp.apply(self)

    def sqrt(self) -> "Tensor":
        return Sqrt.apply(self)

    def sin(self) -> "Tensor":
        return Sin.apply(self)

    def cos(self) -> "Tensor":
        return Cos.apply(self)

    def relu(self) -> "Tensor":
        return ReLU.apply(self)

    def sigmoid(self) -> "Tensor":
        return Sigmoid.apply(self)

    def softplus(self) -> "Tensor":
        return Softplus.apply(self)

    def tanh(self) -> "Tensor":
        return Tanh.apply(self)


def as_tensor(x: ArrayLike, dtype=None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=dtype or _DEFAULT_DTYPE), requires_grad=False)


# ----------------------------------------------------------------------
# 원소별 이항 연산
# ----------------------------------------------------------------------
class Add(Function):
    def forward(self, a, b):
        broadcast_shapes(a.shape, b.shape, "add")
        return a + b

    def backward(self, grad):
        a, b = self.inputs
        return unbroadcast(grad, a.shape), unbroadcast(grad, b.shape)


class Sub(Function):
    def forward(self, a, b):
        broadcast_shapes(a.shape, b.shape, "subtract")
        return a - b

    def backward(self, grad):
        a, b = self.inputs
        return unbroadcast(grad, a.shape), unbroadcast(-grad, b.shape)


class Mul(Function):
    def forward(self, a, b):
        broadcast_shapes(a.shape, b.shape, "multiply")
        return a * b

    def backward(self, grad):
        a, b = self.inputs
        ga = unbroadcast(grad * b.data, a.shape) if self.needs_grad[0] else None
        gb = unbroadcast(grad * a.data, b.shape) if self.needs_grad[1] else None
        return ga, gb


class Div(Function):
    def forward(self, a, b):
        broadcast_shapes(a.shape, b.shape, "divide")
        return a / b

    def backward(self, grad):
        a, b = self.inputs
        ga = unbroadcast(grad / b.data, a.shape) if self.needs_grad[0] else None
        gb = (
            unbroadcast(-grad * a.data / (b.data * b.data), b.shape)
            if self.needs_grad[1]
            else None
        )
        return ga, gb


class Neg(Function):
    def forward(self, a):
        return -a

    def backward(self, grad):
        return (-grad,)


class MatMul(Function):
    def forward(self, a, b):
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise ShapeError(f"matmul: 모양 {a.shape} 와 {b.shape} 를 곱할 수 없습니다")
        return a @ b

    def backward(self, grad):
        a, b = self.inputs
        ga = grad @ b.data.T if self.needs_grad[0] else None
        gb = a.data.T @ grad if self.needs_grad[1] else None
        return ga, gb


# ----------------------------------------------------------------------
# 원소별 단항 연산
# ----------------------------------------------------------------------
class Exp(Function):
    def forward(self, a):
        self.out = np.exp(a)
        return self.out

    def backward(self, grad):
        return (grad * self.out,)


class Sqrt(Function):
    def forward(self, a):
        self.out = np.sqrt(a)
        return self.out

    def backward(self, grad):
        # 0 에서의 기울기는 0 (부분 기울기)
        safe = np.where(self.out > 0, self.out, 1.0)
        return (np.where(self.out > 0, 0.5 * grad / safe, 0.0).astype(grad.dtype),)


class Sin(Function):
    def forward(self, a):
        return np.sin(a)

    def backward(self, grad):
        return (grad * np.cos(self.inputs[0].data),)


class Cos(Function):
    def forward(self, a):
        return np.cos(a)

    def backward(self, grad):
        return (-grad * np.sin(self.inputs[0].data),)


class ReLU(Function):
    def forward(self, a):
        return np.maximum(a, 0)

    def backward(self, grad):
        return (grad * (self.inputs[0].data > 0),)


class Sigmoid(Function):
    def forward(self, a):
        # 오버플로 없는 형태
        self.out = np.where(a >= 0, 1.0 / (1.0 + np.exp(-np.abs(a))),
                            np.exp(-np.abs(a)) / (1.0 + np.exp(-np.abs(a)))).astype(a.dtype)
        return self.out

    def backward(self, grad):
        return (grad * self.out * (1.0 - self.out),)


class Softplus(Function):
    def forward(self, a):
        return np.logaddexp(0, a).astype(a.dtype)

    def backward(self, grad):
        a = self.inputs[0].data
        sig = np.where(a >= 0, 1.0 / (1.0 + np.exp(-np.abs(a))),
                       np.exp(-np.abs(a)) / (1.0 + np.exp(-np.abs(a))))
        return ((grad * sig).astype(grad.dtype),)


class Tanh(Function):
    def forward(self, a):
        self.out = np.tanh(a)
        return self.out

    def backward(self, grad):
        return (grad * (1.0 - self.out * self.out),)


# ----------------------------------------------------------------------
# 축 연산 / 모양 변경
# ----------------------------------------------------------------------
def _normalize_axes(axis, ndim: int) -> Tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(a % ndim for a in axis)


class Sum(Function):
    def forward(self, a, axis=None, keepdims=False):
        self.axes = _normalize_axes(axis, a.ndim)
        self.keepdims = keepdims
        return np.asarray(a.sum(axis=self.axes, keepdims=keepdims))

    def backward(self, grad):
        shape = self.inputs[0].shape
        if not self.keepdims:
            grad = np.expand_dims(grad, self.axes)
        return (np.broadcast_to(grad, shape).copy(),)


class Mean(Function):
    def forward(self, a, axis=None, keepdims=False):
        self.axes = _normalize_axes(axis, a.ndim)
        self.keepdims = keepdims
        self.count = int(np.prod([a.shape[i] for i in self.axes])) if a.ndim else 1
        return np.asarray(a.mean(axis=self.axes, keepdims=keepdims))

    def backward(self, grad):
        shape = self.inputs[0].shape
        if not self.keepdims:
            grad = np.expand_dims(grad, self.axes)
        return (np.broadcast_to(grad / self.count, shape).copy(),)


class Reshape(Function):
    def forward(self, a, shape=()):
        try:
            return a.reshape(shape)
        except ValueError:
            raise ShapeError(f"reshape: {a.shape} 를 {shape} 로 바꿀 수 없습니다") from None

    def backward(self, grad):
        return (grad.reshape(self.inputs[0].shape),)


class BroadcastTo(Function):
    def forward(self, a, shape=()):
        if broadcast_shapes(a.shape, shape, "broadcast") != tuple(shape):
            raise ShapeError(f"broadcast: {a.shape} 를 {shape} 로 확장할 수 없습니다")
        return np.broadcast_to(a, shape).copy()

    def backward(self, grad):
        return (unbroadcast(grad, self.inputs[0].shape),)


class Slice(Function):
    def forward(self, a, index=None):
        self.index = index
        return np.array(a[index])

    def backward(self, grad):
        full = np.zeros_like(self.inputs[0].data)
        np.add.at(full, self.index, grad)
        return (full,)


class CumSum(Function):
    # exclusive: out[0] = 0, out[i] = a[0] + ... + a[i-1]
    def forward(self, a, axis=-1, exclusive=False):
        self.axis = axis % a.ndim
        self.exclusive = exclusive
        if not exclusive:
            return np.cumsum(a, axis=self.axis)
        moved = np.moveaxis(a, self.axis, -1)
        out = np.zeros_like(moved)
        out[..., 1:] = np.cumsum(moved[..., :-1], axis=-1)
        return np.moveaxis(out, -1, self.axis)

    def backward(self, grad):
        moved = np.moveaxis(grad, self.axis, -1)
        if not self.exclusive:
            rev = np.flip(np.cumsum(np.flip(moved, -1), axis=-1), -1)
        else:
            rev = np.zeros_like(moved)
            rev[..., :-1] = np.flip(np.cumsum(np.flip(moved[..., 1:], -1), axis=-1), -1)
        return (np.moveaxis(rev, -1, self.axis),)


class Concatenate(Function):
    def forward(self, *arrays, axis=-1):
        ref = arrays[0]
        axis = axis % ref.ndim
        for arr in arrays[1:]:
            if arr.ndim != ref.ndim or any(
                arr.shape[i] != ref.shape[i] for i in range(ref.ndim) if i != axis
            ):
                raise ShapeError(
                    f"concatenate: 축 {axis} 이외의 모양이 다릅니다 {ref.shape} 와 {arr.shape}"
                )
        self.axis = axis
        self.splits = np.cumsum([arr.shape[axis] for arr in arrays])[:-1]
        return np.concatenate(arrays, axis=axis)

    def backward(self, grad):
        return tuple(np.split(grad, self.splits, axis=self.axis))
