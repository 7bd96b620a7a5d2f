# src/fields/layers.py
from collections import OrderedDict
from typing import Dict, Iterator, Tuple

import numpy as np

from src.autodiff.tensor import Tensor
from src.utils.errors import InputError

UNIT_TOLERANCE = 1e-6


def require_unit_directions(d: Tensor) -> None:
    norms = np.linalg.norm(np.asarray(d.data, dtype=np.float64), axis=-1)
    worst = float(np.max(np.abs(norms - 1.0))) if norms.size else 0.0
    if worst > UNIT_TOLERANCE:
        raise InputError(f"방향 벡터가 단위 길이가 아닙니다 (최대 오차 {worst:.3e})")


class Module:
    """파라미터를 가진 네트워크 구성 요소의 기본 클래스"""

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Tensor]]:
        for name, value in vars(self).items():
            full = f"{prefix}{name}"
            if isinstance(value, Tensor) and value.requires_grad:
                yield full, value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{full}.")
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{full}.{i}.")

    def parameters(self) -> Dict[str, Tensor]:
        return OrderedDict(self.named_parameters())

    def zero_grad(self) -> None:
        for p in self.parameters().values():
            p.zero_grad()


class Linear(Module):
    """y = x W + b. 가중치는 U(-1/sqrt(in), 1/sqrt(in)), 편향은 0 으로 초기화"""

    def __init__(
        self,
        in_features: int,
        out_features: int,
        rng: np.random.Generator,
        dtype=np.float32,
        zero_init: bool = False,
    ):
        self.in_features = in_features
        self.out_features = out_features
        if zero_init:
            weight = np.zeros((in_features, out_features))
        else:
            bound = 1.0 / np.sqrt(in_features)
            weight = rng.uniform(-bound, bound, size=(in_features, out_features))
        self.weight = Tensor(weight.astype(dtype), requires_grad=True)
        self.bias = Tensor(np.zeros(out_features, dtype=dtype), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return x @ self.weight + self.bias
