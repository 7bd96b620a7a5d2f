# src/evalkit/metrics.py
"""이미지 품질 지표 (PSNR, SSIM)"""

from typing import Tuple

import numpy as np
from scipy.ndimage import gaussian_filter

from src.utils.errors import InputError, ShapeError
from src.utils.image_io import quantize

LUMA_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])
SSIM_SIGMA = 1.5
SSIM_TRUNCATE = 3.5
SSIM_WINDOW = 2 * int(SSIM_TRUNCATE * SSIM_SIGMA + 0.5) + 1  # 11
K1, K2 = 0.01, 0.03


def _check_pair(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"이미지 크기가 다릅니다: {a.shape} vs {b.shape}")
    return a, b


def to_luma(image: np.ndarray) -> np.ndarray:
    """선형 RGB 의 휘도. 이미 2D 면 그대로"""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        return image
    if image.ndim == 3 and image.shape[-1] == 3:
        return image @ LUMA_WEIGHTS
    raise ShapeError(f"회색조 또는 RGB 이미지가 아닙니다: {image.shape}")


def mse(a: np.ndarray, b: np.ndarray) -> float:
    a, b = _check_pair(a, b)
    return float(np.mean((a - b) ** 2))


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 1.0) -> float:
    """10·log10(peak² / MSE). 같은 이미지면 +inf"""
    error = mse(a, b)
    if error == 0:
        return float("inf")
    return float(10.0 * np.log10(peak**2 / error))


def ssim(a: np.ndarray, b: np.ndarray, peak: float = 1.0) -> float:
    """휘도 위의 평균 국소 SSIM. 11×11 가우시안 창(σ=1.5), 가장자리 5 픽셀 제외"""
    a, b = _check_pair(a, b)
    x, y = to_luma(a), to_luma(b)
    if min(x.shape) < SSIM_WINDOW:
        raise InputError(f"이미지 {x.shape} 가 SSIM 창 {SSIM_WINDOW} 보다 작습니다")

    def blur(img):
        return gaussian_filter(img, sigma=SSIM_SIGMA, truncate=SSIM_TRUNCATE, mode="reflect")

    c1 = (K1 * peak) ** 2
    c2 = (K2 * peak) ** 2
    ux, uy = blur(x), blur(y)
    uxx, uyy, uxy = blur(x * x), blur(y * y), blur(x * y)
    vx = uxx - ux * ux
    vy = uyy - uy * uy
    vxy = uxy - ux * uy

    a1, a2 = 2 * ux * uy + c1, 2 * vxy + c2
    b1, b2 = ux**2 + uy**2 + c1, vx + vy + c2
    ssim_map = (a1 * a2) / (b1 * b2)
    pad = (SSIM_WINDOW - 1) // 2
    return float(ssim_map[pad:-pad, pad:-pad].mean(dtype=np.float64))


def image_metrics(render: np.ndarray, reference: np.ndarray, quantized: bool = True) -> Tuple[float, float]:
    """(PSNR, SSIM). quantized 면 두 이미지를 8비트로 양자화한 뒤 계산"""
    render, reference = _check_pair(render, reference)
    if quantized:
        render, reference = quantize(render), quantize(reference)
    return psnr(render, reference), ssim(render, reference)


HIGHLIGHT_THRESHOLD = 0.05


def highlight_overlap(
    predicted: np.ndarray, reference: np.ndarray, threshold: float = HIGHLIGHT_THRESHOLD
) -> Tuple[float, float]:
    """
    반사 하이라이트 비교. 휘도 > threshold 인 영역의 IoU 와 에너지 비율을 돌려준다.
    에너지 비율은 정답 영역 안의 예측 휘도 합 / 같은 영역의 정답 휘도 합 (영역 밖 예측은 세지 않음).
    정답에 하이라이트가 없으면 (nan, nan)
    """
    predicted, reference = _check_pair(predicted, reference)
    x, y = to_luma(predicted), to_luma(reference)
    truth = y > threshold
    if not truth.any():
        return float("nan"), float("nan")
    mask = x > threshold
    iou = float((mask & truth).sum() / (mask | truth).sum())
    energy = float(x[truth].sum() / y[truth].sum())
    return iou, energy
