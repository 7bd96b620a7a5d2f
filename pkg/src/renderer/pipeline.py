# src/renderer/pipeline.py
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from src.autodiff.tensor import Tensor, no_grad
from src.fields.model import GlassNerfModel
from src.fields.nerf_network import NerfNetwork
from src.renderer.rays import Camera, Ray, RayBatch, generate_rays, image_pixels
from src.renderer.sampling import (
    SampleBatch,
    build_samples,
    hierarchical_resample,
    merge_t_values,
    stratified_sample,
)
from src.renderer.volume import (
    accumulate_offsets,
    composite,
    refraction_weights,
    render_feature,
    render_view_independent,
)

logger = logging.getLogger(__name__)


@dataclass
class RenderConfig:
    """샘플링 및 분기 설정. 기본값은 데스크 규모"""

    n_coarse: int = 32
    n_fine_glass: int = 8
    n_fine_vi: int = 8
    perturb: bool = True
    white_background: bool = True
    use_glass: bool = True
    use_view_dependent: bool = True
    offsets_in_coarse: bool = True
    chunk_size: int = 1024

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass
class CompositeOutput:
    rgb: Tensor  # (R, 3)  C = C_vi + α·C_vd
    rgb_vi: Tensor  # (R, 3)
    rgb_vd: Tensor  # (R, 3)
    alpha: Tensor  # (R, 1)
    depth: Tensor  # (R,)  시점 독립 가중치로 계산
    refraction_weights: Tensor  # (R, N)
    weights_vi: Tensor  # (R, N)  재샘플링 PDF
    offsets: Tensor  # (R, N, 3)  Δx
    positions: np.ndarray  # (R, N, 3)  원래 샘플 위치 x
    adjusted_positions: Tensor  # (R, N, 3)  x'
    samples: SampleBatch


@dataclass
class RenderOutput:
    fine: CompositeOutput
    coarse: CompositeOutput


class GlassNerfRenderer:
    """coarse → 계층적 재샘플링 → fine 으로 이어지는 전체 렌더링 파이프라인"""

    def __init__(self, model: GlassNerfModel, config: Optional[RenderConfig] = None):
        self.model = model
        self.config = config or RenderConfig()
        self.dtype = np.dtype(model.config.dtype)

    def _tensor(self, array: np.ndarray) -> Tensor:
        return Tensor(np.asarray(array, dtype=self.dtype))

    def _render_samples(
        self, rays: RayBatch, samples: SampleBatch, network: NerfNetwork, apply_offsets: bool
    ) -> CompositeOutput:
        cfg = self.config
        n_rays, n_samples = samples.t_values.shape
        flat_x = self._tensor(samples.positions.reshape(-1, 3))
        dirs = np.broadcast_to(rays.directions[:, None, :], samples.positions.shape)
        flat_d = self._tensor(dirs.reshape(-1, 3))
        x = flat_x.reshape(n_rays, n_samples, 3)
        deltas = self._tensor(samples.deltas)

        if cfg.use_glass:
            glass_out = self.model.glass(flat_x, flat_d)
            sigma_gl = glass_out.sigma.reshape(n_rays, n_samples)
            offsets = glass_out.offset.reshape(n_rays, n_samples, 3)
            weights = refraction_weights(sigma_gl, deltas)
            adjusted = accumulate_offsets(x, weights, offsets) if apply_offsets else x
        else:
            weights = self._tensor(np.zeros((n_rays, n_samples)))
            offsets = self._tensor(np.zeros((n_rays, n_samples, 3)))
            adjusted = x

        field = network(adjusted.reshape(-1, 3), flat_d, view_dependent=cfg.use_view_dependent)
        sigma_vi = field.sigma_vi.reshape(n_rays, n_samples)
        color_vi = field.color_vi.reshape(n_rays, n_samples, 3)
        rgb_vi, depth, weights_vi = render_view_independent(
            sigma_vi, color_vi, deltas, self._tensor(samples.t_values), cfg.white_background
        )

        if cfg.use_view_dependent:
            sigma_vd = field.sigma_vd.reshape(n_rays, n_samples)
            features = field.feature_vd.reshape(n_rays, n_samples, network.feature_dim)
            feature_map = render_feature(sigma_vd, features, deltas)
            rgb_vd, alpha = self.model.decoder_gate(feature_map)
            rgb = composite(rgb_vi, rgb_vd, alpha)
        else:
            rgb_vd = self._tensor(np.zeros((n_rays, 3)))
            alpha = self._tensor(np.zeros((n_rays, 1)))
            rgb = rgb_vi

        return CompositeOutput(
            rgb=rgb,
            rgb_vi=rgb_vi,
            rgb_vd=rgb_vd,
            alpha=alpha,
            depth=depth,
            refraction_weights=weights,
            weights_vi=weights_vi,
            offsets=offsets,
            positions=samples.positions,
            adjusted_positions=adjusted,
            samples=samples,
        )

    def render_rays(self, rays: RayBatch, rng: Optional[np.random.Generator] = None) -> RenderOutput:
        cfg = self.config
        jitter = rng if cfg.perturb else None
        coarse_samples = stratified_sample(rays, cfg.n_coarse, jitter)
        coarse = self._render_samples(
            rays, coarse_samples, self.model.nerf_coarse, apply_offsets=cfg.offsets_in_coarse
        )

        t_coarse = coarse_samples.t_values
        vi_weights = coarse.weights_vi.data.astype(np.float64)
        n_glass, n_vi = cfg.n_fine_glass, cfg.n_fine_vi
        if not cfg.use_glass:
            # 유리 분기가 없으면 그 몫도 시점 독립 밀도에서 뽑는다
            n_glass, n_vi = 0, n_glass + n_vi
        extra = []
        if n_glass > 0:
            glass_w = coarse.refraction_weights.data.astype(np.float64)
            extra.append(hierarchical_resample(t_coarse, glass_w, n_glass, "glass", jitter).t_values)
        if n_vi > 0:
            extra.append(hierarchical_resample(t_coarse, vi_weights, n_vi, "view_independent", jitter).t_values)
        fine_samples = build_samples(rays, merge_t_values(t_coarse, *extra))
        fine = self._render_samples(rays, fine_samples, self.model.nerf_fine, apply_offsets=True)
        return RenderOutput(fine=fine, coarse=coarse)


def render_pixel(ray: Ray, model: GlassNerfModel, config: Optional[RenderConfig] = None,
                 rng: Optional[np.random.Generator] = None) -> RenderOutput:
    """광선 하나에 대한 전체 파이프라인"""
    return GlassNerfRenderer(model, config).render_rays(RayBatch.from_rays([ray]), rng)


@dataclass
class ImageRender:
    rgb: np.ndarray  # (H, W, 3)
    rgb_vi: np.ndarray
    rgb_vd: np.ndarray  # α·C_vd
    alpha: np.ndarray  # (H, W)
    depth: np.ndarray  # (H, W)


def render_image(
    renderer: GlassNerfRenderer,
    camera: Camera,
    near: float,
    far: float,
    threads: int = 1,
    on_chunk: Optional[Callable[[RenderOutput, slice], None]] = None,
) -> ImageRender:
    """
    청크 단위로 한 장 전체를 렌더링 (테이프 없음, 순서 보존).
    on_chunk 는 청크마다 (RenderOutput, 광선 slice) 로 호출된다.
    """
    rays = generate_rays(camera, image_pixels(camera), near, far)
    chunk = max(int(renderer.config.chunk_size), 1)
    slices = [slice(i, min(i + chunk, len(rays))) for i in range(0, len(rays), chunk)]

    def work(index: slice) -> List[np.ndarray]:
        with no_grad():
            full = renderer.render_rays(rays.subset(index), rng=None)
        if on_chunk is not None:
            on_chunk(full, index)
        out = full.fine
        return [
            out.rgb.data,
            out.rgb_vi.data,
            out.alpha.data * out.rgb_vd.data,
            out.alpha.data[:, 0],
            out.depth.data,
        ]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, slices))
    else:
        parts = [work(s) for s in slices]

    h, w = camera.height, camera.width
    stacked = [np.concatenate([p[k] for p in parts], axis=0) for k in range(5)]
    return ImageRender(
        rgb=stacked[0].reshape(h, w, 3),
        rgb_vi=stacked[1].reshape(h, w, 3),
        rgb_vd=stacked[2].reshape(h, w, 3),
        alpha=stacked[3].reshape(h, w),
        depth=stacked[4].reshape(h, w),
    )
