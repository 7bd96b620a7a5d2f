# src/trainer/losses.py
from typing import Sequence, Union

import numpy as np

from src.autodiff.tensor import Tensor, as_tensor
from src.utils.errors import InputError, ShapeError

DEFAULT_EPSILON = 1e-5


def render_loss(predicted: Union[Tensor, np.ndarray], reference: Union[Tensor, np.ndarray]) -> Tensor:
    """Σ_r ‖C̄(r) - C(r)‖² (배치 합, 평균 아님)"""
    predicted = as_tensor(predicted)
    reference = as_tensor(reference, dtype=predicted.dtype)
    if predicted.shape != reference.shape:
        raise ShapeError(f"예측 {predicted.shape} 와 정답 {reference.shape} 의 모양이 다릅니다")
    diff = predicted - reference
    return (diff * diff).sum()


def offset_loss(offsets: Union[Tensor, Sequence[Tensor]]) -> Tensor:
    """모든 샘플 점·성분에 대한 sqrt(Σ Δx²). 여러 패스는 합친 뒤 한 번만 제곱근"""
    if isinstance(offsets, (Tensor, np.ndarray)):
        offsets = [offsets]
    offsets = [as_tensor(o) for o in offsets]
    if not offsets:
        raise InputError("오프셋 목록이 비어 있습니다")
    total = None
    for o in offsets:
        term = (o * o).sum()
        total = term if total is None else total + term
    return total.sqrt()


def total_loss(render: Tensor, offset: Tensor, epsilon: float = DEFAULT_EPSILON) -> Tensor:
    """L_render + ε·L_offset"""
    if epsilon < 0:
        raise InputError(f"ε 는 0 이상이어야 합니다: {epsilon}")
    return as_tensor(render) + epsilon * as_tensor(offset)
