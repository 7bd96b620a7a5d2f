# src/autodiff/functional.py
from typing import Sequence

from src.autodiff.tensor import (
    Add,
    BroadcastTo,
    Concatenate,
    Cos,
    CumSum,
    Div,
    Exp,
    MatMul,
    Mean,
    Mul,
    ReLU,
    Reshape,
    Sigmoid,
    Sin,
    Slice,
    Softplus,
    Sqrt,
    Sub,
    Sum,
    Tanh,
    Tensor,
)


def matmul(a, b) -> Tensor:
    return MatMul.apply(a, b)


def add(a, b) -> Tensor:
    return Add.apply(a, b)


def subtract(a, b) -> Tensor:
    return Sub.apply(a, b)


def multiply(a, b) -> Tensor:
    return Mul.apply(a, b)


def divide(a, b) -> Tensor:
    return Div.apply(a, b)


def exp(x) -> Tensor:
    return Exp.apply(x)


def sqrt(x) -> Tensor:
    return Sqrt.apply(x)


def sin(x) -> Tensor:
    return Sin.apply(x)


def cos(x) -> Tensor:
    return Cos.apply(x)


def relu(x) -> Tensor:
    return ReLU.apply(x)


def sigmoid(x) -> Tensor:
    return Sigmoid.apply(x)


def softplus(x) -> Tensor:
    return Softplus.apply(x)


def tanh(x) -> Tensor:
    return Tanh.apply(x)


def sum(x, axis=None, keepdims: bool = False) -> Tensor:  # noqa: A001
    return Sum.apply(x, axis=axis, keepdims=keepdims)


def mean(x, axis=None, keepdims: bool = False) -> Tensor:
    return Mean.apply(x, axis=axis, keepdims=keepdims)


def concatenate(tensors: Sequence, axis: int = -1) -> Tensor:
    return Concatenate.apply(*tensors, axis=axis)


def slice(x, index) -> Tensor:  # noqa: A001
    return Slice.apply(x, index=index)


def cumsum(x, axis: int = -1, exclusive: bool = False) -> Tensor:
    """누적합. exclusive=True 이면 자기 자신을 제외한 앞쪽 합"""
    return CumSum.apply(x, axis=axis, exclusive=exclusive)


def broadcast_to(x, shape) -> Tensor:
    return BroadcastTo.apply(x, shape=tuple(shape))


def reshape(x, shape) -> Tensor:
    return Reshape.apply(x, shape=tuple(shape))
