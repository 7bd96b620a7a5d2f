# src/evalkit/report.py
import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
import plotly.express as px
from tqdm import tqdm

from src.evalkit.glass_surface import (
    DEFAULT_THRESHOLD,
    GlassPointCloud,
    GlassPointCollector,
    plane_normal_error,
    surface_error,
)
from src.evalkit.metrics import highlight_overlap, image_metrics
from src.renderer.pipeline import GlassNerfRenderer, ImageRender, render_image
from src.utils.data_loader import Dataset
from src.utils.errors import DatasetError
from src.utils.image_io import image_grid, write_rgb

logger = logging.getLogger(__name__)

REPORT_NAME = "report.json"
VIEWS_NAME = "views.csv"
VIEW_COLUMNS = ["file_path", "psnr", "ssim"]


def _json_number(value: float):
    """JSON 에는 inf 가 없으므로 문자열로 남긴다. nan 은 null"""
    if value is None or math.isnan(value):
        return None
    return value if math.isfinite(value) else ("inf" if value > 0 else "-inf")


@dataclass
class MetricReport:
    views: List[Dict] = field(default_factory=list)  # {file_path, psnr, ssim[, highlight_iou, highlight_energy]}
    surface: Optional[Dict] = None  # SurfaceError.to_dict()
    normal_error_deg: Optional[float] = None
    point_count: int = 0
    mean_offset_magnitude: float = 0.0
    threshold: float = DEFAULT_THRESHOLD
    split: str = "test"
    config: Dict = field(default_factory=dict)

    @property
    def mean_psnr(self) -> float:
        return float(np.mean([v["psnr"] for v in self.views])) if self.views else float("nan")

    @property
    def mean_ssim(self) -> float:
        return float(np.mean([v["ssim"] for v in self.views])) if self.views else float("nan")

    def _mean_of(self, key: str) -> Optional[float]:
        values = [v[key] for v in self.views if key in v and not math.isnan(v[key])]
        return float(np.mean(values)) if values else None

    def to_frame(self) -> pd.DataFrame:
        if not self.views:
            return pd.DataFrame(columns=VIEW_COLUMNS)
        return pd.DataFrame(self.views)

    def to_dict(self) -> Dict:
        return {
            "split": self.split,
            "views": [{k: _json_number(x) if isinstance(x, float) else x for k, x in v.items()} for v in self.views],
            "mean_psnr": _json_number(self.mean_psnr),
            "mean_ssim": _json_number(self.mean_ssim),
            "mean_highlight_iou": self._mean_of("highlight_iou"),
            "mean_highlight_energy": self._mean_of("highlight_energy"),
            "surface_error": self.surface,
            "plane_normal_error_deg": self.normal_error_deg,
            "point_count": self.point_count,
            "mean_offset_magnitude": self.mean_offset_magnitude,
            "threshold": self.threshold,
            "config": self.config,
        }

    def save(self, out_dir: str) -> str:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, REPORT_NAME)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
        self.to_frame().to_csv(os.path.join(out_dir, VIEWS_NAME), index=False)
        return path


def comparison_grid(reference: np.ndarray, render: ImageRender) -> np.ndarray:
    """gt | 렌더 | α·C_vd | C_vi | 깊이 를 한 줄로"""
    depth = render.depth
    peak = float(depth.max()) if depth.size and depth.max() > 0 else 1.0
    depth_rgb = np.repeat((depth / peak)[..., None], 3, axis=-1)
    return image_grid([[reference, render.rgb, render.rgb_vd, render.rgb_vi, depth_rgb]])


def evaluate_model(
    renderer: GlassNerfRenderer,
    dataset: Dataset,
    split: str = "test",
    threshold: float = DEFAULT_THRESHOLD,
    threads: int = 1,
    grid_dir: Optional[str] = None,
    quantized: bool = True,
    progress: bool = False,
    config: Optional[Dict] = None,
):
    """
    split 의 모든 뷰를 렌더해 PSNR/SSIM 을 재고, 같은 렌더에서 유리 포인트를 모은다.
    정답 유리판이 없으면 표면 지표는 빠진다. (MetricReport, GlassPointCloud)
    """
    frames = dataset.split(split)
    if not frames:
        raise DatasetError(f"'{split}' split 이 비어 있습니다: {dataset.root}")
    if any(f.image is None for f in frames):
        raise DatasetError("평가 이미지가 로드되지 않았습니다 (load_images=True 필요)")

    collector = GlassPointCollector(threshold)
    report = MetricReport(threshold=threshold, split=split, config=config or {})
    if grid_dir:
        os.makedirs(grid_dir, exist_ok=True)

    for frame in tqdm(frames, desc=f"eval/{split}", disable=not progress):
        camera = dataset.camera(frame)
        rendered = render_image(renderer, camera, dataset.near, dataset.far, threads=threads, on_chunk=collector)
        collector.next_view(camera.width * camera.height)
        value_psnr, value_ssim = image_metrics(rendered.rgb, frame.image, quantized=quantized)
        view = {"file_path": frame.file_path, "psnr": value_psnr, "ssim": value_ssim}
        reflection = dataset.reflection(frame)
        if reflection is not None:
            view["highlight_iou"], view["highlight_energy"] = highlight_overlap(rendered.rgb_vd, reflection)
        report.views.append(view)
        logger.debug("%s: PSNR %.3f SSIM %.4f", frame.file_path, value_psnr, value_ssim)
        if grid_dir:
            name = os.path.splitext(os.path.basename(frame.file_path))[0]
            write_rgb(os.path.join(grid_dir, f"{name}_grid.png"), comparison_grid(frame.image, rendered))

    cloud = collector.cloud()
    report.point_count = len(cloud)
    report.mean_offset_magnitude = collector.mean_magnitude

    if not dataset.has_glass_truth:
        logger.warning("정답 유리판 정보가 없어 표면 지표를 생략합니다: %s", dataset.root)
    elif len(cloud) == 0:
        logger.warning("임계값 %.4g 를 넘는 유리 포인트가 없어 표면 오차를 계산하지 않습니다", threshold)
    else:
        slabs = dataset.glass_slabs
        report.surface = surface_error(cloud, slabs).to_dict()
        report.normal_error_deg = plane_normal_error(cloud.points, slabs)
    return report, cloud


def write_point_cloud_html(path: str, cloud: GlassPointCloud, truth: Optional[np.ndarray] = None) -> str:
    """추출 포인트(와 정답 표면 샘플)를 plotly 3D 산점도로 저장"""
    frames = [pd.DataFrame(cloud.points, columns=["x", "y", "z"]).assign(source="extracted")]
    if truth is not None and len(truth):
        frames.append(pd.DataFrame(truth, columns=["x", "y", "z"]).assign(source="ground truth"))
    table = pd.concat(frames, ignore_index=True)
    fig = px.scatter_3d(table, x="x", y="y", z="z", color="source", title="유리 표면 포인트 클라우드")
    fig.update_traces(marker={"size": 2})
    fig.update_layout(height=700, scene={"aspectmode": "data"})
    fig.write_html(path)
    return path
