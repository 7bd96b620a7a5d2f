# src/fields/model.py
from collections import OrderedDict
from dataclasses import asdict, dataclass, field
from typing import Dict, List

import numpy as np

from src.autodiff.tensor import Tensor
from src.fields.decoder_gate import DecoderGate
from src.fields.encoding import EncodingConfig
from src.fields.glass_network import GlassNetwork
from src.fields.layers import Module
from src.fields.nerf_network import NerfNetwork
from src.utils.config import dataclass_from_dict


@dataclass
class NetworkConfig:
    """네트워크 크기 설정 (데스크 규모 기본값)"""

    width: int = 64
    glass_depth: int = 7
    nerf_depth: int = 8
    skip_layer: int = 5
    feature_dim: int = 64
    position_scale: float = 10.0  # cm, 인코딩 전에 위치를 나누는 값
    dtype: str = "float32"
    encoding: EncodingConfig = field(default_factory=EncodingConfig)

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict) -> "NetworkConfig":
        data = dict(data)
        encoding = dataclass_from_dict(EncodingConfig, data.pop("encoding", {}))
        return dataclass_from_dict(cls, {**data, "encoding": encoding})


class GlassNerfModel(Module):
    """Θ_gl (공유), Θ_nf (coarse/fine), Θ_dc·Θ_gt 를 묶은 전체 모델"""

    def __init__(self, config: NetworkConfig, seed: int = 0):
        self.config = config
        rng = np.random.default_rng(seed)
        dtype = np.dtype(config.dtype).type
        common = dict(position_scale=config.position_scale, dtype=dtype)
        self.glass = GlassNetwork(
            config.encoding, rng, width=config.width, depth=config.glass_depth, **common
        )
        self.nerf_coarse = NerfNetwork(
            config.encoding, rng, width=config.width, depth=config.nerf_depth,
            skip_layer=config.skip_layer, feature_dim=config.feature_dim, **common
        )
        self.nerf_fine = NerfNetwork(
            config.encoding, rng, width=config.width, depth=config.nerf_depth,
            skip_layer=config.skip_layer, feature_dim=config.feature_dim, **common
        )
        self.decoder_gate = DecoderGate(config.feature_dim, rng, width=config.width, dtype=dtype)

    def trainable_parameters(self, use_glass: bool = True, use_view_dependent: bool = True) -> Dict[str, Tensor]:
        """현재 모드에서 실제로 그래프에 참여하는 파라미터만"""
        excluded = set()
        if not use_glass:
            excluded.update(n for n in self.parameters() if n.startswith("glass."))
        if not use_view_dependent:
            excluded.update(n for n in self.parameters() if n.startswith("decoder_gate."))
            for net in ("nerf_coarse", "nerf_fine"):
                excluded.update(getattr(self, net).view_dependent_names(f"{net}."))
        return OrderedDict((n, p) for n, p in self.parameters().items() if n not in excluded)

    def offset_head_names(self) -> List[str]:
        return self.glass.offset_head_names("glass.")

    def state_arrays(self) -> Dict[str, np.ndarray]:
        return OrderedDict((n, p.data.copy()) for n, p in self.parameters().items())

    def load_state_arrays(self, arrays: Dict[str, np.ndarray]) -> None:
        params = self.parameters()
        missing = [n for n in params if n not in arrays]
        if missing:
            raise KeyError(f"파라미터 누락: {missing[:5]}")
        for name, p in params.items():
            value = np.asarray(arrays[name])
            if value.shape != p.shape:
                raise ValueError(f"{name}: 모양 {value.shape} ≠ {p.shape}")
            p.data = value.astype(p.dtype).copy()
