# src/fields/glass_network.py
from dataclasses import dataclass

import numpy as np

from src.autodiff.functional import concatenate
from src.autodiff.tensor import Tensor, as_tensor
from src.fields.encoding import EncodingConfig, positional_encode
from src.fields.layers import Linear, Module, require_unit_directions


@dataclass
class GlassFieldOutput:
    sigma: Tensor  # (N,) 유리 밀도 σ_gl ≥ 0
    offset: Tensor  # (N, 3) 오프셋 Δx


class GlassNetwork(Module):
    """
    유리 네트워크.
    위치 가지(trunk)에서 σ_gl 을, trunk 특징 + 방향 인코딩에서 Δx 를 추정한다.
    Δx 헤드의 마지막 층은 0 으로 초기화되어 학습 초기에는 직선 광선(x' = x)이 된다.
    """

    def __init__(
        self,
        encoding: EncodingConfig,
        rng: np.random.Generator,
        width: int = 64,
        depth: int = 7,
        position_scale: float = 1.0,
        dtype=np.float32,
    ):
        self.encoding = encoding
        self.position_scale = float(position_scale)
        in_width = encoding.position_width
        self.trunk = []
        for i in range(depth):
            self.trunk.append(Linear(in_width if i == 0 else width, width, rng, dtype))
        self.density_head = Linear(width, 1, rng, dtype)
        self.offset_hidden = Linear(width + encoding.direction_width, width // 2, rng, dtype)
        self.offset_head = Linear(width // 2, 3, rng, dtype, zero_init=True)

    def trunk_features(self, x: Tensor) -> Tensor:
        h = positional_encode(
            as_tensor(x) / self.position_scale, self.encoding.l_pos, self.encoding.include_identity
        )
        for layer in self.trunk:
            h = layer(h).relu()
        return h

    def density(self, x: Tensor) -> Tensor:
        h = self.trunk_features(x)
        return self.density_head(h).softplus().reshape(-1)

    def __call__(self, x: Tensor, d: Tensor) -> GlassFieldOutput:
        d = as_tensor(d)
        require_unit_directions(d)
        h = self.trunk_features(x)
        sigma = self.density_head(h).softplus().reshape(-1)
        enc_d = positional_encode(d, self.encoding.l_dir, self.encoding.include_identity)
        g = self.offset_hidden(concatenate([h, enc_d], axis=-1)).relu()
        offset = self.offset_head(g)
        return GlassFieldOutput(sigma=sigma, offset=offset)

    def offset_head_names(self, prefix: str = "") -> list:
        """워밍업 동안 고정할 오프셋 헤드 파라미터 이름"""
        return [
            f"{prefix}offset_hidden.weight",
            f"{prefix}offset_hidden.bias",
            f"{prefix}offset_head.weight",
            f"{prefix}offset_head.bias",
        ]


def glass_field(x: Tensor, d: Tensor, network: GlassNetwork) -> GlassFieldOutput:
    return network(x, d)
