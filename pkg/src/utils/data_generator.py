# src/utils/data_generator.py
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from src.oracle.presets import Trajectory, orbit_poses
from src.oracle.scene import SceneSpec
from src.oracle.tracer import DEFAULT_MAX_TRAVERSALS, OracleView, render_view
from src.renderer.rays import Camera
from src.utils.errors import InputError
from src.utils.image_io import DEPTH_MAX, write_depth, write_rgb

logger = logging.getLogger(__name__)

MANIFEST_NAME = "transforms.json"
GLASS_POINTS_NAME = "glass_points.xyz"
SPLITS = ("train", "test", "val")


@dataclass
class GenerationResult:
    manifest_path: str
    image_count: int
    truncated_rays: int
    glass_point_count: int


class DatasetGenerator:
    """오라클 추적기로 자세가 붙은 이미지와 정답 기하를 만든다"""

    def __init__(
        self,
        scene: SceneSpec,
        trajectory: Trajectory,
        random_seed: int = 7,
        max_traversals: int = DEFAULT_MAX_TRAVERSALS,
        points_per_face: int = 2000,
    ):
        """초기화"""
        self.scene = scene
        self.trajectory = trajectory
        self.random_seed = random_seed
        self.max_traversals = max_traversals
        self.points_per_face = points_per_face

    def plan_views(self, counts: Tuple[int, int, int]) -> List[Tuple[str, int, np.ndarray]]:
        """(split, 인덱스, c2w) 목록. 같은 시드면 같은 자세"""
        if len(counts) != 3 or min(counts) < 1:
            raise InputError(f"train/test/val 개수는 모두 1 이상이어야 합니다: {counts}")
        rng = np.random.default_rng(self.random_seed)
        views = []
        for split, count in zip(SPLITS, counts):
            for i, pose in enumerate(orbit_poses(self.trajectory, count, rng)):
                views.append((split, i, pose))
        return views

    def glass_points(self) -> np.ndarray:
        """유리판 경계 면 위의 정답 점 (N, 3)"""
        rng = np.random.default_rng(self.random_seed + 1)
        if not self.scene.slabs:
            return np.zeros((0, 3))
        return np.concatenate([s.sample_surface(self.points_per_face, rng) for s in self.scene.slabs], axis=0)

    def render(self, pose: np.ndarray, resolution: Tuple[int, int]) -> OracleView:
        width, height = resolution
        camera = Camera.from_fov(width, height, self.trajectory.camera_angle_x, pose)
        return render_view(self.scene, camera, self.max_traversals)

    def generate(
        self,
        out_dir: str,
        counts: Tuple[int, int, int] = (40, 8, 8),
        resolution: Tuple[int, int] = (64, 64),
        threads: int = 1,
        progress: bool = False,
        config_echo: Optional[Dict] = None,
    ) -> GenerationResult:
        views = self.plan_views(counts)
        width, height = resolution
        depth_scale = self.trajectory.far / DEPTH_MAX
        os.makedirs(out_dir, exist_ok=True)

        def work(view):
            return self.render(view[2], resolution)

        if threads > 1:
            pool = ThreadPoolExecutor(max_workers=threads)
            iterator = pool.map(work, views)
        else:
            pool = None
            iterator = map(work, views)
        frames = []
        truncated = 0
        try:
            for (split, i, pose), rendered in tqdm(
                zip(views, iterator), total=len(views), desc="views", disable=not progress
            ):
                stem = f"{split}/r_{i:03d}"
                write_rgb(os.path.join(out_dir, f"{stem}.png"), rendered.rgb)
                write_depth(os.path.join(out_dir, f"{stem}_depth.png"), rendered.depth, depth_scale)
                write_rgb(os.path.join(out_dir, f"{stem}_reflection.png"), rendered.reflection)
                truncated += rendered.truncated_rays
                frames.append(
                    {
                        "file_path": f"{stem}.png",
                        "split": split,
                        "transform_matrix": pose.tolist(),
                        "depth_path": f"{stem}_depth.png",
                        "reflection_path": f"{stem}_reflection.png",
                    }
                )
        finally:
            if pool is not None:
                pool.shutdown()

        points = self.glass_points()
        np.savetxt(os.path.join(out_dir, GLASS_POINTS_NAME), points, fmt="%.6f")
        if truncated:
            logger.warning("유리판 통과 한도로 잘린 광선 %d 개", truncated)

        manifest = {
            "camera_angle_x": self.trajectory.camera_angle_x,
            "width": width,
            "height": height,
            "near": self.trajectory.near,
            "far": self.trajectory.far,
            "units": "cm",
            "depth_scale": depth_scale,
            "frames": frames,
            "ground_truth": {
                "slabs": [s.to_dict() for s in self.scene.slabs],
                "glass_points": GLASS_POINTS_NAME,
            },
            "scene": self.scene.to_dict(),
            "trajectory": self.trajectory.to_dict(),
            "generator": {
                "seed": self.random_seed,
                "counts": list(counts),
                "max_traversals": self.max_traversals,
                **(config_echo or {}),
            },
            "truncated_rays": truncated,
        }
        manifest_path = os.path.join(out_dir, MANIFEST_NAME)
        with open(manifest_path, "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2)
        return GenerationResult(manifest_path, len(frames), truncated, len(points))


def generate_dataset(
    scene: SceneSpec,
    trajectory: Trajectory,
    counts: Tuple[int, int, int],
    resolution: Tuple[int, int],
    seed: int,
    out_dir: str,
    threads: int = 1,
    progress: bool = False,
) -> GenerationResult:
    return DatasetGenerator(scene, trajectory, random_seed=seed).generate(
        out_dir, counts, resolution, threads=threads, progress=progress
    )
