# src/evalkit/glass_surface.py
import logging
import threading
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
from sklearn.decomposition import PCA

from src.autodiff.tensor import no_grad
from src.oracle.scene import GlassSlab
from src.renderer.pipeline import GlassNerfRenderer, RenderOutput
from src.renderer.rays import RayBatch
from src.utils.errors import EmptyPointCloudError, InputError

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.01  # cm


@dataclass
class GlassPointCloud:
    points: np.ndarray  # (N, 3) cm
    magnitudes: np.ndarray  # (N,) ‖w·Δx‖

    def __len__(self) -> int:
        return len(self.points)

    def save_xyz(self, path: str) -> None:
        np.savetxt(path, self.points, fmt="%.6f")

    @classmethod
    def load_xyz(cls, path: str) -> "GlassPointCloud":
        points = np.loadtxt(path, ndmin=2).reshape(-1, 3)
        return cls(points, np.full(len(points), np.nan))


@dataclass
class SurfaceError:
    mean: float
    median: float
    rms: float
    count: int

    def to_dict(self) -> Dict:
        return {"mean": self.mean, "median": self.median, "rms": self.rms, "count": self.count}


def weighted_offset_magnitude(output: RenderOutput) -> np.ndarray:
    """fine 패스 샘플별 ‖w_i·Δx_i‖ (R, N)"""
    fine = output.fine
    weighted = fine.refraction_weights.data[..., None] * fine.offsets.data
    return np.linalg.norm(weighted.astype(np.float64), axis=-1)


class GlassPointCollector:
    """청크별 렌더 결과에서 임계값을 넘는 샘플 위치를 모은다. 청크 순서로 정렬해 결과가 결정적"""

    def __init__(self, threshold: float = DEFAULT_THRESHOLD):
        if threshold <= 0:
            raise InputError(f"임계값은 양수여야 합니다: {threshold}")
        self.threshold = threshold
        self._parts: Dict[int, tuple] = {}
        self._sum = 0.0
        self._count = 0
        self._lock = threading.Lock()
        self._offset = 0

    def __call__(self, output: RenderOutput, index: slice) -> None:
        magnitude = weighted_offset_magnitude(output)
        mask = magnitude > self.threshold
        points = output.fine.positions[mask]
        with self._lock:
            key = self._offset + (index.start or 0)
            self._parts[key] = (points, magnitude[mask])
            self._sum += float(magnitude.sum())
            self._count += magnitude.size

    def next_view(self, ray_count: int) -> None:
        """다음 이미지의 청크 키가 겹치지 않도록 밀어 둔다"""
        self._offset += ray_count

    @property
    def mean_magnitude(self) -> float:
        return self._sum / self._count if self._count else 0.0

    def cloud(self) -> GlassPointCloud:
        if not self._parts:
            return GlassPointCloud(np.zeros((0, 3)), np.zeros(0))
        keys = sorted(self._parts)
        return GlassPointCloud(
            np.concatenate([self._parts[k][0] for k in keys], axis=0).reshape(-1, 3),
            np.concatenate([self._parts[k][1] for k in keys], axis=0),
        )


def extract_glass_surface(
    renderer: GlassNerfRenderer,
    rays: RayBatch,
    threshold: float = DEFAULT_THRESHOLD,
) -> GlassPointCloud:
    """‖w_i·Δx_i‖ > threshold 인 샘플 위치 x_i 를 모은다 (엄격한 부등호)"""
    collector = GlassPointCollector(threshold)
    chunk = max(int(renderer.config.chunk_size), 1)
    for start in range(0, len(rays), chunk):
        index = slice(start, min(start + chunk, len(rays)))
        with no_grad():
            output = renderer.render_rays(rays.subset(index), rng=None)
        collector(output, index)
    return collector.cloud()


def face_distances(points: np.ndarray, slab: GlassSlab) -> np.ndarray:
    """각 점에서 유리판 두 경계 면(유한 사각형)까지의 최소 거리 (N,)"""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    u, v = slab.basis
    hu, hv = slab.half_extents
    best = np.full(len(points), np.inf)
    for center, _ in slab.faces():
        rel = points - center
        a = np.clip(rel @ u, -hu, hu)
        b = np.clip(rel @ v, -hv, hv)
        closest = center + a[:, None] * u + b[:, None] * v
        best = np.minimum(best, np.linalg.norm(points - closest, axis=-1))
    return best


def point_distances(points: np.ndarray, slabs: Sequence[GlassSlab]) -> np.ndarray:
    if not slabs:
        raise InputError("정답 유리판이 없습니다")
    return np.min(np.stack([face_distances(points, s) for s in slabs], axis=0), axis=0)


def surface_error(cloud, slabs: Sequence[GlassSlab]) -> SurfaceError:
    """가장 가까운 정답 경계 면까지 거리의 평균 (중앙값, RMS 도 함께)"""
    points = cloud.points if isinstance(cloud, GlassPointCloud) else np.asarray(cloud, dtype=np.float64)
    points = points.reshape(-1, 3)
    if len(points) == 0:
        raise EmptyPointCloudError("포인트 클라우드가 비어 있어 표면 오차를 계산할 수 없습니다")
    d = point_distances(points, slabs)
    return SurfaceError(
        mean=float(d.mean()),
        median=float(np.median(d)),
        rms=float(np.sqrt(np.mean(d**2))),
        count=int(len(d)),
    )


def fit_plane(points: np.ndarray):
    """PCA 평면 적합. (단위 법선, 중심)"""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(points) < 3:
        raise EmptyPointCloudError(f"평면 적합에는 점이 3 개 이상 필요합니다: {len(points)}")
    pca = PCA(n_components=3).fit(points)
    return pca.components_[-1], pca.mean_


def plane_normal_error(points: np.ndarray, slabs: Sequence[GlassSlab]) -> Optional[float]:
    """적합 평면 법선과 가장 가까운 유리판 법선 사이 각도 (도). 점이 부족하면 None"""
    if len(points) < 3 or not slabs:
        return None
    normal, _ = fit_plane(points)
    cosines = [abs(float(normal @ s.normal_vec)) for s in slabs]
    return float(np.degrees(np.arccos(np.clip(max(cosines), 0.0, 1.0))))


def group_by_slab(points: np.ndarray, slabs: Sequence[GlassSlab]) -> List[np.ndarray]:
    """각 점을 가장 가까운 유리판에 배정"""
    per_slab = np.stack([face_distances(points, s) for s in slabs], axis=0)
    owner = np.argmin(per_slab, axis=0)
    return [points[owner == k] for k in range(len(slabs))]
