# src/renderer/sampling.py
import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from src.renderer.rays import RayBatch
from src.utils.errors import InputError, ShapeError

logger = logging.getLogger(__name__)

FAR_SENTINEL = 1e10
SOURCES = ("glass", "view_independent")
MERGE_MIN_GAP = 1e-6


@dataclass
class SampleBatch:
    """광선별 오름차순 샘플. deltas 의 마지막 값은 FAR_SENTINEL"""

    t_values: np.ndarray  # (R, N)
    positions: np.ndarray  # (R, N, 3)
    deltas: np.ndarray  # (R, N)

    @property
    def count(self) -> int:
        return self.t_values.shape[1]


def build_samples(rays: RayBatch, t_values: np.ndarray) -> SampleBatch:
    t_values = np.asarray(t_values, dtype=np.float64)
    if t_values.ndim != 2 or t_values.shape[0] != len(rays):
        raise ShapeError(f"t 값 모양 {t_values.shape} 이(가) 광선 수 {len(rays)} 와 맞지 않습니다")
    positions = rays.origins[:, None, :] + t_values[..., None] * rays.directions[:, None, :]
    deltas = np.concatenate(
        [np.diff(t_values, axis=-1), np.full((len(rays), 1), FAR_SENTINEL)], axis=-1
    )
    return SampleBatch(t_values, positions, deltas)


def stratified_sample(
    rays: RayBatch, n_samples: int, rng: Optional[np.random.Generator] = None
) -> SampleBatch:
    """
    [near, far] 를 N 개의 같은 구간으로 나누고 구간마다 한 점을 균일 지터로 뽑는다.
    rng 가 없으면 각 구간의 중점을 쓴다.
    """
    if n_samples < 2:
        raise InputError(f"샘플 수는 2 이상이어야 합니다: {n_samples}")
    n_rays = len(rays)
    if rng is None:
        u = np.full((n_rays, n_samples), 0.5)
    else:
        u = rng.uniform(0.0, 1.0, size=(n_rays, n_samples))
    bins = np.arange(n_samples)[None, :]
    t = rays.near + (rays.far - rays.near) * (bins + u) / n_samples
    return build_samples(rays, t)


class ResampleResult(NamedTuple):
    t_values: np.ndarray  # (R, count) 정렬된 추가 샘플
    uniform_fallback: np.ndarray  # (R,) 가중치가 모두 0 이라 균일 분포로 대체한 광선


def pdf_bin_edges(t_values: np.ndarray) -> np.ndarray:
    """[t_0, 중점..., t_{N-1}] 형태의 N 개 구간 경계 (R, N+1)"""
    mids = 0.5 * (t_values[:, 1:] + t_values[:, :-1])
    return np.concatenate([t_values[:, :1], mids, t_values[:, -1:]], axis=-1)


def hierarchical_resample(
    t_values: np.ndarray,
    weights: np.ndarray,
    count: int,
    source: str = "view_independent",
    rng: Optional[np.random.Generator] = None,
) -> ResampleResult:
    """정규화된 가중치로 만든 구간별 상수 PDF 에서 역 CDF 샘플링"""
    if source not in SOURCES:
        raise InputError(f"알 수 없는 샘플링 소스: {source}")
    t_values = np.asarray(t_values, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != t_values.shape:
        raise ShapeError(f"가중치 모양 {weights.shape} ≠ t 모양 {t_values.shape}")
    if np.any(weights < 0):
        raise InputError("가중치는 음수가 될 수 없습니다")
    n_rays, n_bins = t_values.shape
    if count <= 0:
        return ResampleResult(np.zeros((n_rays, 0)), np.zeros(n_rays, dtype=bool))

    totals = weights.sum(axis=-1, keepdims=True)
    fallback = totals[:, 0] <= 0
    pdf = np.where(totals > 0, weights / np.where(totals > 0, totals, 1.0), 1.0 / n_bins)
    if np.any(fallback):
        logger.debug("%s 가중치가 0 인 광선 %d 개는 균일 샘플링으로 대체", source, int(fallback.sum()))
    cdf = np.concatenate([np.zeros((n_rays, 1)), np.cumsum(pdf, axis=-1)], axis=-1)
    cdf[:, -1] = 1.0

    if rng is None:
        u = np.broadcast_to((np.arange(count) + 0.5) / count, (n_rays, count))
    else:
        u = rng.uniform(0.0, 1.0, size=(n_rays, count))

    # u 이하인 마지막 cdf 경계가 선택 구간
    idx = (u[..., None] >= cdf[:, None, :]).sum(axis=-1) - 1
    idx = np.clip(idx, 0, n_bins - 1)
    lower = np.take_along_axis(cdf, idx, axis=-1)
    upper = np.take_along_axis(cdf, idx + 1, axis=-1)
    span = upper - lower
    frac = np.where(span > 0, (u - lower) / np.where(span > 0, span, 1.0), 0.5)

    edges = pdf_bin_edges(t_values)
    left = np.take_along_axis(edges, idx, axis=-1)
    right = np.take_along_axis(edges, idx + 1, axis=-1)
    samples = np.sort(left + frac * (right - left), axis=-1)
    return ResampleResult(samples, fallback)


def merge_t_values(*t_sets: np.ndarray) -> np.ndarray:
    """
    여러 t 집합을 합쳐 광선별로 다시 정렬한다.
    겹치는 값은 광선 구간 폭의 MERGE_MIN_GAP 배 이하 간격으로 벌려 순증가로 만든다.
    광선별 최솟값과 최댓값은 그대로다.
    """
    merged = np.sort(np.concatenate([t for t in t_sets if t.shape[-1] > 0], axis=-1), axis=-1)
    n = merged.shape[-1]
    if n < 2:
        return merged
    lo, hi = merged[:, :1], merged[:, -1:]
    span = hi - lo
    gap = np.where(span > 0, span, 1.0) * MERGE_MIN_GAP / n
    steps = np.arange(n)[None, :] * gap
    spread = np.maximum.accumulate(merged - steps, axis=-1) + steps
    top = spread[:, -1:]
    # 끝점이 밀려난 광선은 [lo, hi] 로 되돌린다
    overflow = (top > hi) & (span > 0)
    scale = np.where(overflow, span / np.where(overflow, top - lo, 1.0), 1.0)
    spread = lo + (spread - lo) * scale
    spread[:, -1:] = np.where(span > 0, hi, spread[:, -1:])
    crowded = np.any(np.diff(merged, axis=-1) < gap, axis=-1, keepdims=True)
    return np.where(crowded, spread, merged)
