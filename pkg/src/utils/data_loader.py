# src/utils/data_loader.py
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from PIL import Image

from src.oracle.scene import GlassSlab
from src.renderer.rays import Camera
from src.utils.errors import DatasetError, InputError
from src.utils.image_io import read_depth, read_rgb

logger = logging.getLogger(__name__)

MANIFEST_NAME = "transforms.json"
RIGID_TOLERANCE = 1e-6


@dataclass
class Frame:
    file_path: str
    c2w: np.ndarray
    split: str
    depth_path: Optional[str] = None
    reflection_path: Optional[str] = None
    image: Optional[np.ndarray] = None  # (H, W, 3) float64


@dataclass
class Dataset:
    root: str
    manifest: Dict
    camera_angle_x: float
    width: int
    height: int
    near: float
    far: float
    frames: List[Frame] = field(default_factory=list)

    def split(self, name: str) -> List[Frame]:
        return [f for f in self.frames if f.split == name]

    def camera(self, frame: Frame) -> Camera:
        return Camera.from_fov(self.width, self.height, self.camera_angle_x, frame.c2w)

    @property
    def depth_scale(self) -> float:
        return float(self.manifest.get("depth_scale", 1.0))

    @property
    def glass_slabs(self) -> List[GlassSlab]:
        truth = self.manifest.get("ground_truth") or {}
        return [GlassSlab(**s) for s in truth.get("slabs", [])]

    @property
    def has_glass_truth(self) -> bool:
        truth = self.manifest.get("ground_truth") or {}
        return bool(truth.get("slabs"))

    def glass_points(self) -> Optional[np.ndarray]:
        truth = self.manifest.get("ground_truth") or {}
        name = truth.get("glass_points")
        if not name:
            return None
        path = os.path.join(self.root, name)
        if not os.path.exists(path):
            return None
        return np.loadtxt(path, ndmin=2).reshape(-1, 3)

    def depth(self, frame: Frame) -> Optional[np.ndarray]:
        if not frame.depth_path:
            return None
        return read_depth(os.path.join(self.root, frame.depth_path), self.depth_scale)

    def reflection(self, frame: Frame) -> Optional[np.ndarray]:
        if not frame.reflection_path:
            return None
        return read_rgb(os.path.join(self.root, frame.reflection_path))


def check_rigid(c2w: np.ndarray, tolerance: float = RIGID_TOLERANCE) -> Optional[str]:
    """강체 변환이 아니면 이유를 돌려준다"""
    c2w = np.asarray(c2w, dtype=np.float64)
    if c2w.shape != (4, 4):
        return f"4x4 행렬이 아닙니다: {c2w.shape}"
    if not np.allclose(c2w[3], [0.0, 0.0, 0.0, 1.0], atol=tolerance):
        return f"마지막 행이 [0, 0, 0, 1] 이 아닙니다: {c2w[3].tolist()}"
    rotation = c2w[:3, :3]
    error = np.abs(rotation.T @ rotation - np.eye(3)).max()
    if error > tolerance:
        return f"회전 행렬이 직교가 아닙니다 (오차 {error:.2e})"
    det = np.linalg.det(rotation)
    if abs(det - 1.0) > tolerance:
        return f"회전 행렬의 행렬식이 +1 이 아닙니다 ({det:.6f})"
    return None


def _manifest_path(path: str) -> str:
    return os.path.join(path, MANIFEST_NAME) if os.path.isdir(path) else path


def read_manifest(path: str) -> Dict:
    manifest_path = _manifest_path(path)
    if not os.path.exists(manifest_path):
        raise DatasetError(f"매니페스트가 없습니다: {manifest_path}")
    try:
        with open(manifest_path, encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise DatasetError(f"매니페스트 JSON 파싱 실패 ({manifest_path}): {e}") from e


class DatasetLoader:
    """transforms.json 매니페스트를 읽고 검증한다"""

    def __init__(self, path: str, load_images: bool = True):
        self.manifest_path = _manifest_path(path)
        self.root = os.path.dirname(os.path.abspath(self.manifest_path))
        self.load_images = load_images

    def load(self) -> Dataset:
        manifest = read_manifest(self.manifest_path)
        for key in ("camera_angle_x", "frames"):
            if key not in manifest:
                raise DatasetError(f"매니페스트에 '{key}' 항목이 없습니다: {self.manifest_path}")
        if not manifest["frames"]:
            raise DatasetError(f"프레임이 비어 있습니다: {self.manifest_path}")

        frames = [self._frame(i, raw) for i, raw in enumerate(manifest["frames"])]
        width = manifest.get("width")
        height = manifest.get("height")
        if width is None or height is None:
            with Image.open(os.path.join(self.root, frames[0].file_path)) as img:
                width, height = img.size

        for frame in frames:
            self._check_image(frame, width, height)

        return Dataset(
            root=self.root,
            manifest=manifest,
            camera_angle_x=float(manifest["camera_angle_x"]),
            width=int(width),
            height=int(height),
            near=float(manifest.get("near", 2.0)),
            far=float(manifest.get("far", 6.0)),
            frames=frames,
        )

    def _frame(self, index: int, raw: Dict) -> Frame:
        if "file_path" not in raw or "transform_matrix" not in raw:
            raise DatasetError(f"프레임 {index}: file_path 또는 transform_matrix 가 없습니다")
        c2w = np.asarray(raw["transform_matrix"], dtype=np.float64)
        reason = check_rigid(c2w)
        if reason:
            raise DatasetError(f"프레임 {index} ({raw['file_path']}) 변환이 강체가 아닙니다: {reason}")
        file_path = raw["file_path"]
        if not os.path.splitext(file_path)[1]:
            file_path += ".png"
        return Frame(
            file_path=file_path,
            c2w=c2w,
            split=raw.get("split", "train"),
            depth_path=raw.get("depth_path"),
            reflection_path=raw.get("reflection_path"),
        )

    def _check_image(self, frame: Frame, width: int, height: int) -> None:
        path = os.path.join(self.root, frame.file_path)
        if not os.path.exists(path):
            raise DatasetError(f"이미지 파일이 없습니다: {path}")
        with Image.open(path) as img:
            size = img.size
        if size != (width, height):
            raise DatasetError(f"이미지 해상도 {size[0]}x{size[1]} 이(가) 선언된 {width}x{height} 와 다릅니다: {path}")
        if self.load_images:
            frame.image = read_rgb(path)


def load_dataset(path: str, load_images: bool = True) -> Dataset:
    return DatasetLoader(path, load_images).load()


def load_poses(path: str, split: Optional[str] = None) -> List[np.ndarray]:
    """
    자세 파일 읽기. 매니페스트 형식({"frames": [...]}) 또는 4x4 행렬 목록 JSON.
    split 을 주면 해당 split 프레임만. 형식이 잘못되면 InputError.
    """
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise InputError(f"자세 파일 JSON 파싱 실패 ({path}): {e}") from e
    raw = data["frames"] if isinstance(data, dict) and "frames" in data else data
    if split and isinstance(raw, list):
        raw = [item for item in raw if not isinstance(item, dict) or item.get("split", "train") == split]
    if not isinstance(raw, list) or not raw:
        raise InputError(f"자세 목록이 비어 있거나 형식이 잘못되었습니다: {path}")
    poses = []
    for i, item in enumerate(raw):
        matrix = item.get("transform_matrix") if isinstance(item, dict) else item
        try:
            c2w = np.asarray(matrix, dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise InputError(f"자세 {i} 를 행렬로 읽을 수 없습니다: {e}") from e
        reason = check_rigid(c2w)
        if reason:
            raise InputError(f"자세 {i} 가 잘못되었습니다: {reason}")
        poses.append(c2w)
    return poses
