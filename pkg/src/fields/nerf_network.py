# src/fields/nerf_network.py
from dataclasses import dataclass

import numpy as np

from src.autodiff.functional import concatenate
from src.autodiff.tensor import Tensor, as_tensor
from src.fields.encoding import EncodingConfig, positional_encode
from src.fields.layers import Linear, Module, require_unit_directions


@dataclass
class RadianceFieldOutput:
    sigma_vi: Tensor  # (N,)
    color_vi: Tensor  # (N, 3) ∈ [0,1]
    sigma_vd: Tensor  # (N,)
    feature_vd: Tensor  # (N, θ)


class NerfNetwork(Module):
    """
    분해 NeRF 네트워크.
    공유 trunk(위치만) → σ_vi, c_vi 헤드 (방향과 무관)
    trunk 특징 + 방향 인코딩 → σ_vd, f_vd 헤드 (시점 의존)
    """

    def __init__(
        self,
        encoding: EncodingConfig,
        rng: np.random.Generator,
        width: int = 64,
        depth: int = 8,
        skip_layer: int = 5,
        feature_dim: int = 64,
        position_scale: float = 1.0,
        dtype=np.float32,
    ):
        self.encoding = encoding
        self.position_scale = float(position_scale)
        self.skip_layer = skip_layer
        self.feature_dim = feature_dim
        pos_w = encoding.position_width
        dir_w = encoding.direction_width
        half = max(width // 2, 1)

        self.trunk = []
        for i in range(depth):
            if i == 0:
                in_w = pos_w
            elif i == skip_layer:
                in_w = width + pos_w
            else:
                in_w = width
            self.trunk.append(Linear(in_w, width, rng, dtype))

        self.sigma_vi_head = Linear(width, 1, rng, dtype)
        self.color_vi_hidden = Linear(width, half, rng, dtype)
        self.color_vi_head = Linear(half, 3, rng, dtype)

        self.vd_bottleneck = Linear(width, width, rng, dtype)
        self.vd_hidden = Linear(width + dir_w, half, rng, dtype)
        self.sigma_vd_head = Linear(half, 1, rng, dtype)
        self.feature_vd_head = Linear(half, feature_dim, rng, dtype)

    def trunk_features(self, x: Tensor) -> Tensor:
        enc_x = positional_encode(
            as_tensor(x) / self.position_scale, self.encoding.l_pos, self.encoding.include_identity
        )
        h = enc_x
        for i, layer in enumerate(self.trunk):
            if i == self.skip_layer:
                h = concatenate([h, enc_x], axis=-1)
            h = layer(h).relu()
        return h

    def view_independent(self, x: Tensor):
        """σ_vi, c_vi 만 계산 (방향 입력 없음)"""
        h = self.trunk_features(x)
        return self._vi_heads(h)

    def _vi_heads(self, h: Tensor):
        sigma_vi = self.sigma_vi_head(h).softplus().reshape(-1)
        color_vi = self.color_vi_head(self.color_vi_hidden(h).relu()).sigmoid()
        return sigma_vi, color_vi

    def __call__(self, x: Tensor, d: Tensor, view_dependent: bool = True) -> RadianceFieldOutput:
        d = as_tensor(d)
        require_unit_directions(d)
        h = self.trunk_features(x)
        sigma_vi, color_vi = self._vi_heads(h)
        if not view_dependent:
            n = sigma_vi.shape[0]
            return RadianceFieldOutput(
                sigma_vi=sigma_vi,
                color_vi=color_vi,
                sigma_vd=Tensor(np.zeros(n, dtype=sigma_vi.dtype)),
                feature_vd=Tensor(np.zeros((n, self.feature_dim), dtype=sigma_vi.dtype)),
            )
        enc_d = positional_encode(d, self.encoding.l_dir, self.encoding.include_identity)
        g = self.vd_hidden(concatenate([self.vd_bottleneck(h), enc_d], axis=-1)).relu()
        sigma_vd = self.sigma_vd_head(g).softplus().reshape(-1)
        feature_vd = self.feature_vd_head(g)
        return RadianceFieldOutput(sigma_vi, color_vi, sigma_vd, feature_vd)

    def view_dependent_names(self, prefix: str = "") -> list:
        heads = ("vd_bottleneck", "vd_hidden", "sigma_vd_head", "feature_vd_head")
        return [f"{prefix}{h}.{p}" for h in heads for p in ("weight", "bias")]


def nerf_field(x: Tensor, d: Tensor, network: NerfNetwork) -> RadianceFieldOutput:
    return network(x, d)
