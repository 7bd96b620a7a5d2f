# src/renderer/rays.py
from dataclasses import dataclass

import numpy as np

from src.utils.errors import InputError, ShapeError


@dataclass
class Camera:
    """핀홀 카메라. c2w 는 OpenGL 관례 (x 오른쪽, y 위, -z 시선 방향)"""

    width: int
    height: int
    focal: float
    c2w: np.ndarray  # (4, 4)

    def __post_init__(self):
        self.c2w = np.asarray(self.c2w, dtype=np.float64)
        if self.focal <= 0:
            raise InputError(f"초점 거리는 양수여야 합니다: {self.focal}")
        if self.width <= 0 or self.height <= 0:
            raise InputError(f"해상도가 잘못되었습니다: {self.width}x{self.height}")
        if self.c2w.shape != (4, 4):
            raise ShapeError(f"c2w 는 4x4 행렬이어야 합니다: {self.c2w.shape}")

    @classmethod
    def from_fov(cls, width: int, height: int, camera_angle_x: float, c2w: np.ndarray) -> "Camera":
        focal = 0.5 * width / np.tan(0.5 * camera_angle_x)
        return cls(width, height, float(focal), c2w)

    @property
    def principal_point(self):
        return 0.5 * self.width, 0.5 * self.height


@dataclass
class Ray:
    origin: np.ndarray
    direction: np.ndarray
    near: float
    far: float

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=np.float64)
        self.direction = np.asarray(self.direction, dtype=np.float64)
        if abs(np.linalg.norm(self.direction) - 1.0) > 1e-6:
            raise InputError("광선 방향은 단위 벡터여야 합니다")
        if not 0 <= self.near < self.far:
            raise InputError(f"0 ≤ near < far 를 만족해야 합니다: near={self.near}, far={self.far}")


@dataclass
class RayBatch:
    """R 개 광선 묶음 (scene 단위 cm)"""

    origins: np.ndarray  # (R, 3)
    directions: np.ndarray  # (R, 3)
    near: float
    far: float

    def __post_init__(self):
        self.origins = np.asarray(self.origins, dtype=np.float64).reshape(-1, 3)
        self.directions = np.asarray(self.directions, dtype=np.float64).reshape(-1, 3)
        if self.origins.shape != self.directions.shape:
            raise ShapeError(f"origins {self.origins.shape} 와 directions {self.directions.shape} 불일치")
        if not 0 <= self.near < self.far:
            raise InputError(f"0 ≤ near < far 를 만족해야 합니다: near={self.near}, far={self.far}")

    def __len__(self) -> int:
        return len(self.origins)

    def subset(self, index) -> "RayBatch":
        return RayBatch(self.origins[index], self.directions[index], self.near, self.far)

    @classmethod
    def from_rays(cls, rays) -> "RayBatch":
        rays = list(rays)
        return cls(
            np.stack([r.origin for r in rays]),
            np.stack([r.direction for r in rays]),
            rays[0].near,
            rays[0].far,
        )


def camera_directions(camera: Camera, pixels: np.ndarray, pixel_center: bool = True) -> np.ndarray:
    """카메라 좌표계에서 정규화 전 방향 (R, 3)"""
    pixels = np.asarray(pixels, dtype=np.float64).reshape(-1, 2)
    cols, rows = pixels[:, 0], pixels[:, 1]
    if np.any(cols < 0) or np.any(cols >= camera.width) or np.any(rows < 0) or np.any(rows >= camera.height):
        raise InputError(f"이미지 범위를 벗어난 픽셀이 있습니다 ({camera.width}x{camera.height})")
    shift = 0.5 if pixel_center else 0.0
    cx, cy = camera.principal_point
    return np.stack(
        [
            (cols + shift - cx) / camera.focal,
            -(rows + shift - cy) / camera.focal,
            -np.ones_like(cols),
        ],
        axis=-1,
    )


def world_rays(camera: Camera, pixels: np.ndarray, pixel_center: bool = True):
    """(origins, 단위 directions) 월드 좌표계 배열"""
    dirs_cam = camera_directions(camera, pixels, pixel_center)
    dirs = dirs_cam @ camera.c2w[:3, :3].T
    dirs = dirs / np.linalg.norm(dirs, axis=-1, keepdims=True)
    origins = np.broadcast_to(camera.c2w[:3, 3], dirs.shape).copy()
    return origins, dirs


def generate_rays(
    camera: Camera,
    pixels: np.ndarray,
    near: float,
    far: float,
    pixel_center: bool = True,
) -> RayBatch:
    """픽셀 좌표 (col, row) 를 지나는 월드 좌표계 광선"""
    origins, dirs = world_rays(camera, pixels, pixel_center)
    return RayBatch(origins, dirs, near, far)


def image_pixels(camera: Camera) -> np.ndarray:
    """행 우선 순서의 모든 픽셀 좌표 (H·W, 2)"""
    rows, cols = np.meshgrid(np.arange(camera.height), np.arange(camera.width), indexing="ij")
    return np.stack([cols.reshape(-1), rows.reshape(-1)], axis=-1)
