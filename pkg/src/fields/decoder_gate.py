# src/fields/decoder_gate.py
from typing import Tuple

import numpy as np

from src.autodiff.tensor import Tensor, as_tensor
from src.fields.layers import Linear, Module
from src.utils.errors import ShapeError


class DecoderGate(Module):
    """렌더링된 특징 F_vd → 반사 색 C_vd (디코더), 혼합 계수 α (게이트)"""

    def __init__(self, feature_dim: int, rng: np.random.Generator, width: int = 64, dtype=np.float32):
        self.feature_dim = feature_dim
        self.decoder_hidden = Linear(feature_dim, width, rng, dtype)
        self.decoder_out = Linear(width, 3, rng, dtype)
        self.gate_hidden = Linear(feature_dim, width, rng, dtype)
        self.gate_out = Linear(width, 1, rng, dtype)

    def __call__(self, features: Tensor) -> Tuple[Tensor, Tensor]:
        features = as_tensor(features)
        if features.shape[-1] != self.feature_dim:
            raise ShapeError(
                f"특징 벡터 폭 {features.shape[-1]} 이(가) θ={self.feature_dim} 과 다릅니다"
            )
        color = self.decoder_out(self.decoder_hidden(features).relu()).sigmoid()
        alpha = self.gate_out(self.gate_hidden(features).relu()).sigmoid()
        return color, alpha


def decode_and_gate(features: Tensor, params: DecoderGate) -> Tuple[Tensor, Tensor]:
    return params(features)
