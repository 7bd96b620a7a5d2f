# src/fields/encoding.py
from dataclasses import dataclass
from typing import Union

import numpy as np

from src.autodiff.functional import concatenate
from src.autodiff.tensor import Tensor, as_tensor
from src.utils.errors import InputError


@dataclass
class EncodingConfig:
    """위치/방향 인코딩 주파수 설정"""

    l_pos: int = 10
    l_dir: int = 4
    include_identity: bool = True

    def width(self, n_freqs: int) -> int:
        """3 차원 벡터 하나의 인코딩 폭: 3·(identity + 2·L)"""
        return 3 * (int(self.include_identity) + 2 * n_freqs)

    @property
    def position_width(self) -> int:
        return self.width(self.l_pos)

    @property
    def direction_width(self) -> int:
        return self.width(self.l_dir)


def positional_encode(
    v: Union[Tensor, np.ndarray], n_freqs: int, include_identity: bool = True
) -> Tensor:
    """
    [v, sin(2^0 π v), cos(2^0 π v), ..., sin(2^(L-1) π v), cos(2^(L-1) π v)]
    주파수마다 sin 3 성분 다음 cos 3 성분이 오도록 마지막 축에 이어 붙인다.
    """
    v = as_tensor(v)
    if not include_identity and n_freqs == 0:
        raise InputError("인코딩 결과가 비어 있습니다 (L=0, identity 없음)")
    parts = [v] if include_identity else []
    for k in range(n_freqs):
        scaled = v * float(2.0 ** k * np.pi)
        parts.append(scaled.sin())
        parts.append(scaled.cos())
    if len(parts) == 1:
        return parts[0]
    return concatenate(parts, axis=-1)
