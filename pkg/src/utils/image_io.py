# src/utils/image_io.py
import os

import numpy as np
from PIL import Image

from src.utils.errors import InputError

DEPTH_MAX = 65535


def to_uint8(image: np.ndarray) -> np.ndarray:
    """[0,1] 실수 이미지를 8비트로 (저장 시점에만 클램프)"""
    return np.round(np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0) * 255.0).astype(np.uint8)


def quantize(image: np.ndarray) -> np.ndarray:
    """8비트 양자화를 거친 [0,1] 실수 이미지"""
    return to_uint8(image).astype(np.float64) / 255.0


def read_rgb(path: str) -> np.ndarray:
    """PNG 를 (H, W, 3) float64 [0,1] 로 읽는다. 알파 채널은 흰 배경에 합성"""
    with Image.open(path) as img:
        if img.mode in ("RGBA", "LA", "P"):
            rgba = np.asarray(img.convert("RGBA"), dtype=np.float64) / 255.0
            alpha = rgba[..., 3:4]
            return rgba[..., :3] * alpha + (1.0 - alpha)
        return np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0


def write_rgb(path: str, image: np.ndarray) -> None:
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[-1] != 3:
        raise InputError(f"RGB 이미지 모양이 아닙니다: {image.shape}")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    Image.fromarray(to_uint8(image)).save(path)


def write_depth(path: str, depth: np.ndarray, scale: float) -> None:
    """깊이(cm) / scale 를 16비트 그레이스케일로 저장"""
    if scale <= 0:
        raise InputError(f"깊이 스케일은 양수여야 합니다: {scale}")
    code = np.round(np.clip(np.asarray(depth, dtype=np.float64) / scale, 0, DEPTH_MAX)).astype(np.uint16)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    Image.fromarray(code).save(path)


def read_depth(path: str, scale: float) -> np.ndarray:
    with Image.open(path) as img:
        code = np.asarray(img, dtype=np.float64)
    return code * scale


def image_grid(rows: list, gap: int = 2) -> np.ndarray:
    """같은 크기의 (H, W, 3) 이미지들을 행/열 격자로 이어 붙인다. 2D 는 회색으로 확장"""
    tiles = [[np.repeat(t[..., None], 3, axis=-1) if t.ndim == 2 else t for t in row] for row in rows]
    h, w = tiles[0][0].shape[:2]
    n_cols = max(len(r) for r in tiles)
    grid = np.ones((len(tiles) * (h + gap) - gap, n_cols * (w + gap) - gap, 3))
    for i, row in enumerate(tiles):
        for j, tile in enumerate(row):
            grid[i * (h + gap): i * (h + gap) + h, j * (w + gap): j * (w + gap) + w] = tile
    return grid
