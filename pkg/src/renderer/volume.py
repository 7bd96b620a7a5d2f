# src/renderer/volume.py
"""
볼륨 렌더링 연산.
모든 함수는 (R, N) 샘플 축 관례를 따르고 Tensor 그래프 위에서 동작한다.
"""

from typing import Tuple, Union

import numpy as np

from src.autodiff.tensor import Tensor, as_tensor
from src.utils.errors import InputError, ShapeError

ArrayOrTensor = Union[Tensor, np.ndarray]


def _check_density(sigma: Tensor, name: str) -> None:
    if np.any(sigma.data < 0):
        raise InputError(f"{name} 에 음수 밀도가 있습니다 (최솟값 {float(sigma.data.min()):.3e})")


def volume_weights(sigma: ArrayOrTensor, deltas: ArrayOrTensor) -> Tuple[Tensor, Tensor]:
    """
    w_i = T_i (1 - exp(-σ_i δ_i)),  T_i = exp(-Σ_{j<i} σ_j δ_j)
    (weights, transmittance) 를 돌려준다.
    """
    sigma = as_tensor(sigma)
    deltas = as_tensor(deltas, dtype=sigma.dtype)
    if sigma.shape != deltas.shape:
        raise ShapeError(f"밀도 모양 {sigma.shape} 와 δ 모양 {deltas.shape} 불일치")
    optical = sigma * deltas
    transmittance = (-optical.cumsum(axis=-1, exclusive=True)).exp()
    opacity = 1.0 - (-optical).exp()
    return transmittance * opacity, transmittance


def refraction_weights(sigma_gl: ArrayOrTensor, deltas: ArrayOrTensor) -> Tensor:
    """유리 밀도로부터 굴절 가중치 w"""
    sigma_gl = as_tensor(sigma_gl)
    _check_density(sigma_gl, "σ_gl")
    weights, _ = volume_weights(sigma_gl, deltas)
    return weights


def accumulate_offsets(x: ArrayOrTensor, weights: ArrayOrTensor, offsets: ArrayOrTensor) -> Tensor:
    """x'_i = x_i + Σ_{j≤i} w_j Δx_j (광선 순서의 포함 누적합)"""
    offsets = as_tensor(offsets)
    x = as_tensor(x, dtype=offsets.dtype)
    weights = as_tensor(weights, dtype=offsets.dtype)
    if x.shape != offsets.shape or weights.shape != x.shape[:-1]:
        raise ShapeError(
            f"위치 {x.shape}, 가중치 {weights.shape}, 오프셋 {offsets.shape} 의 길이가 맞지 않습니다"
        )
    weighted = weights.reshape(weights.shape + (1,)) * offsets
    return x + weighted.cumsum(axis=-2)


def render_view_independent(
    sigma_vi: ArrayOrTensor,
    color_vi: ArrayOrTensor,
    deltas: ArrayOrTensor,
    t_values: ArrayOrTensor = None,
    white_background: bool = False,
) -> Tuple[Tensor, Tensor, Tensor]:
    """(C_vi, depth_vi, weights). depth 는 같은 가중치를 t 에 적용한 값"""
    sigma_vi = as_tensor(sigma_vi)
    _check_density(sigma_vi, "σ_vi")
    color_vi = as_tensor(color_vi, dtype=sigma_vi.dtype)
    weights, _ = volume_weights(sigma_vi, deltas)
    rgb = (weights.reshape(weights.shape + (1,)) * color_vi).sum(axis=-2)
    if white_background:
        rgb = rgb + (1.0 - weights.sum(axis=-1, keepdims=True))
    if t_values is None:
        depth = Tensor(np.zeros(weights.shape[:-1], dtype=weights.dtype))
    else:
        depth = (weights * as_tensor(t_values, dtype=weights.dtype)).sum(axis=-1)
    return rgb, depth, weights


def render_feature(sigma_vd: ArrayOrTensor, features: ArrayOrTensor, deltas: ArrayOrTensor) -> Tensor:
    """F_vd = Σ T_i (1 - exp(-σ_vd,i δ_i)) f_i, T 는 σ_vd 로 계산"""
    sigma_vd = as_tensor(sigma_vd)
    _check_density(sigma_vd, "σ_vd")
    features = as_tensor(features, dtype=sigma_vd.dtype)
    weights, _ = volume_weights(sigma_vd, deltas)
    return (weights.reshape(weights.shape + (1,)) * features).sum(axis=-2)


def composite(color_vi: ArrayOrTensor, color_vd: ArrayOrTensor, alpha: ArrayOrTensor) -> Tensor:
    """C = C_vi + α·C_vd (클램프는 이미지 저장 시점에만)"""
    color_vi = as_tensor(color_vi)
    return color_vi + as_tensor(alpha, dtype=color_vi.dtype) * as_tensor(color_vd, dtype=color_vi.dtype)
