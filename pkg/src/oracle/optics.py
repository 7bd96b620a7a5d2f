# src/oracle/optics.py
"""
기하 광학 함수.
법선 n 은 입사 방향 d 와 마주 보는 (d·n < 0) 쪽을 기준으로 한다.
배열 입력은 (R, 3) 단위 벡터 묶음으로 처리한다.
"""

from typing import Optional, Tuple, Union

import numpy as np

ArrayLike = Union[np.ndarray, float]


def _unit_rows(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def reflect(directions: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """거울 반사 r = d - 2(d·n)n"""
    d = np.asarray(directions, dtype=np.float64)
    n = np.asarray(normals, dtype=np.float64)
    dot = np.sum(d * n, axis=-1, keepdims=True)
    return _unit_rows(d - 2.0 * dot * n)


def refract(directions: np.ndarray, normals: np.ndarray, eta: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """
    스넬 굴절. eta = n1 / n2.
    (굴절 방향, 전반사 마스크) 를 돌려주며 전반사인 광선의 방향은 0 벡터다.
    """
    d = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    n = np.broadcast_to(np.asarray(normals, dtype=np.float64), d.shape)
    eta = np.broadcast_to(np.asarray(eta, dtype=np.float64), d.shape[:-1])

    cos_i = -np.sum(d * n, axis=-1)
    # 법선이 광선과 같은 쪽을 보면 뒤집는다
    n = np.where((cos_i < 0)[..., None], -n, n)
    cos_i = np.abs(cos_i)

    k = 1.0 - eta**2 * (1.0 - cos_i**2)
    tir = k < 0
    out = eta[..., None] * d + (eta * cos_i - np.sqrt(np.maximum(k, 0.0)))[..., None] * n
    out = np.where(tir[..., None], 0.0, out)
    norms = np.linalg.norm(out, axis=-1, keepdims=True)
    out = np.divide(out, norms, out=np.zeros_like(out), where=norms > 0)
    return out, tir


def snell_refract(direction: np.ndarray, normal: np.ndarray, eta: float) -> Optional[np.ndarray]:
    """광선 하나의 굴절 방향. 전반사면 None"""
    out, tir = refract(np.asarray(direction)[None, :], np.asarray(normal)[None, :], eta)
    if tir[0]:
        return None
    return out[0]


def critical_angle(n1: float, n2: float) -> float:
    """n1 > n2 일 때 임계각 (rad). 그 외에는 π/2"""
    if n1 <= n2:
        return 0.5 * np.pi
    return float(np.arcsin(n2 / n1))


def schlick_reflectance(n1: float, n2: float) -> float:
    """수직 입사 반사율 F0 = ((n1 - n2) / (n1 + n2))²"""
    return ((n1 - n2) / (n1 + n2)) ** 2


def schlick_fresnel(cos_i: ArrayLike, n1: float, n2: float) -> np.ndarray:
    """
    Schlick 근사 F = F0 + (1 - F0)(1 - cos)^5.
    n1 > n2 이면 투과각의 cos 을 쓰고 전반사 구간은 1 로 둔다.
    """
    cos_i = np.clip(np.abs(np.asarray(cos_i, dtype=np.float64)), 0.0, 1.0)
    f0 = schlick_reflectance(n1, n2)
    if n1 > n2:
        sin_t2 = (n1 / n2) ** 2 * (1.0 - cos_i**2)
        cos = np.sqrt(np.maximum(1.0 - sin_t2, 0.0))
        return np.where(sin_t2 > 1.0, 1.0, f0 + (1.0 - f0) * (1.0 - cos) ** 5)
    return f0 + (1.0 - f0) * (1.0 - cos_i) ** 5


def fresnel_dielectric(cos_i: ArrayLike, n1: float, n2: float) -> np.ndarray:
    """비편광 유전체 프레넬 반사율 (정확식, 근사 검증용)"""
    cos_i = np.clip(np.abs(np.asarray(cos_i, dtype=np.float64)), 0.0, 1.0)
    sin_t2 = (n1 / n2) ** 2 * (1.0 - cos_i**2)
    cos_t = np.sqrt(np.maximum(1.0 - sin_t2, 0.0))
    rs = (n1 * cos_i - n2 * cos_t) / (n1 * cos_i + n2 * cos_t)
    rp = (n1 * cos_t - n2 * cos_i) / (n1 * cos_t + n2 * cos_i)
    return np.where(sin_t2 > 1.0, 1.0, 0.5 * (rs**2 + rp**2))


def lateral_shift(theta_i: ArrayLike, thickness: float, ior: float, outside_ior: float = 1.0) -> np.ndarray:
    """평행 유리판 통과 후 측면 이동량 d = t·sin(θi - θt) / cos θt"""
    theta_i = np.asarray(theta_i, dtype=np.float64)
    theta_t = np.arcsin(outside_ior * np.sin(theta_i) / ior)
    return thickness * np.sin(theta_i - theta_t) / np.cos(theta_t)
