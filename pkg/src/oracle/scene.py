# src/oracle/scene.py
"""
해석적 장면 기술.
단위는 cm. 모든 교차 함수는 (R, 3) 광선 묶음을 받아 (거리 t (R,), 법선 (R, 3)) 을 돌려주며
맞지 않은 광선의 t 는 inf 다.
"""

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.utils.errors import InputError

HIT_EPS = 1e-9
AXES = {"x": 0, "y": 1, "z": 2}


@dataclass
class Texture:
    """절차적/이미지 텍스처. (u, v) 는 표면 위의 국소 좌표(cm)"""

    kind: str = "solid"  # solid | checker | gradient | painting | image
    color_a: Tuple[float, float, float] = (0.8, 0.8, 0.8)
    color_b: Tuple[float, float, float] = (0.2, 0.2, 0.2)
    scale: float = 2.0  # checker 한 칸 크기 (cm)
    seed: int = 0
    image_path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("solid", "checker", "gradient", "painting", "image"):
            raise InputError(f"알 수 없는 텍스처 종류: {self.kind}")
        if self.scale <= 0:
            raise InputError(f"텍스처 스케일은 양수여야 합니다: {self.scale}")
        if self.kind == "image" and not self.image_path:
            raise InputError("image 텍스처에는 image_path 가 필요합니다")
        self._pixels = None

    def _image(self) -> np.ndarray:
        if self._pixels is None:
            from src.utils.image_io import read_rgb

            self._pixels = read_rgb(self.image_path)
        return self._pixels

    def lookup(self, u: np.ndarray, v: np.ndarray, extent: Tuple[float, float]) -> np.ndarray:
        """(R,) 좌표 → (R, 3) 알베도. extent 는 표면의 반 크기"""
        a = np.asarray(self.color_a, dtype=np.float64)
        b = np.asarray(self.color_b, dtype=np.float64)
        if self.kind == "solid":
            return np.broadcast_to(a, u.shape + (3,)).copy()
        if self.kind == "checker":
            parity = (np.floor(u / self.scale) + np.floor(v / self.scale)) % 2
            return np.where(parity[..., None] > 0, b, a)
        # 정규화 좌표 [0, 1]
        s = np.clip(0.5 + 0.5 * u / max(extent[0], HIT_EPS), 0.0, 1.0)
        r = np.clip(0.5 + 0.5 * v / max(extent[1], HIT_EPS), 0.0, 1.0)
        if self.kind == "gradient":
            return a + s[..., None] * (b - a)
        if self.kind == "painting":
            rng = np.random.default_rng(self.seed)
            freq = rng.uniform(1.0, 4.0, size=(3, 2)) * 2 * np.pi
            phase = rng.uniform(0, 2 * np.pi, size=3)
            mix = 0.5 + 0.5 * np.stack(
                [np.sin(freq[k, 0] * s + freq[k, 1] * r + phase[k]) for k in range(3)], axis=-1
            )
            return np.clip(a * mix + b * (1.0 - mix), 0.0, 1.0)
        pixels = self._image()
        h, w = pixels.shape[:2]
        cols = np.clip((s * w).astype(int), 0, w - 1)
        rows = np.clip(((1.0 - r) * h).astype(int), 0, h - 1)
        return pixels[rows, cols]

    def to_dict(self) -> Dict:
        return {k: v for k, v in asdict(self).items() if not k.startswith("_")}


def _basis(normal: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """법선에 수직인 평면 기저 (u, v). 가능하면 v 가 월드 y 쪽"""
    up = np.array([0.0, 1.0, 0.0])
    if abs(np.dot(up, normal)) > 0.9:
        up = np.array([0.0, 0.0, -1.0])
    u = np.cross(up, normal)
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    return u, v


@dataclass
class Quad:
    """축 정렬 사각형 (벽, 조명 패널). 양면"""

    axis: str  # 법선 축
    offset: float  # 평면 위치
    center: Tuple[float, float]  # 나머지 두 축(좌표 순서)의 중심
    half_extents: Tuple[float, float]
    texture: Texture = field(default_factory=Texture)
    emission: float = 0.0

    def __post_init__(self):
        if self.axis not in AXES:
            raise InputError(f"축은 x/y/z 중 하나여야 합니다: {self.axis}")
        if min(self.half_extents) <= 0:
            raise InputError(f"사각형 크기는 양수여야 합니다: {self.half_extents}")

    @property
    def plane_axes(self) -> Tuple[int, int]:
        k = AXES[self.axis]
        return tuple(i for i in range(3) if i != k)

    def intersect(self, origins: np.ndarray, dirs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        k = AXES[self.axis]
        i, j = self.plane_axes
        dk = dirs[:, k]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (self.offset - origins[:, k]) / dk
        hit = origins + np.nan_to_num(t)[:, None] * dirs
        inside = (
            (np.abs(hit[:, i] - self.center[0]) <= self.half_extents[0])
            & (np.abs(hit[:, j] - self.center[1]) <= self.half_extents[1])
        )
        valid = np.isfinite(t) & (t > HIT_EPS) & inside
        normals = np.zeros_like(dirs)
        normals[:, k] = 1.0
        return np.where(valid, t, np.inf), normals

    def albedo(self, points: np.ndarray, normals: np.ndarray) -> np.ndarray:
        i, j = self.plane_axes
        u = points[:, i] - self.center[0]
        v = points[:, j] - self.center[1]
        return self.texture.lookup(u, v, self.half_extents)

    def to_dict(self) -> Dict:
        out = asdict(self)
        out["texture"] = self.texture.to_dict()
        return out


@dataclass
class Box:
    """축 정렬 상자 물체"""

    center: Tuple[float, float, float]
    half_size: Tuple[float, float, float]
    texture: Texture = field(default_factory=Texture)

    def __post_init__(self):
        if min(self.half_size) <= 0:
            raise InputError(f"상자 크기는 양수여야 합니다: {self.half_size}")

    def intersect(self, origins: np.ndarray, dirs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        c = np.asarray(self.center)
        h = np.asarray(self.half_size)
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / dirs
            t0 = (c - h - origins) * inv
            t1 = (c + h - origins) * inv
        t_near = np.nanmax(np.minimum(t0, t1), axis=-1)
        t_far = np.nanmin(np.maximum(t0, t1), axis=-1)
        valid = (t_near <= t_far) & (t_near > HIT_EPS)
        t = np.where(valid, t_near, np.inf)
        hit = origins + np.where(valid, t, 0.0)[:, None] * dirs
        local = (hit - c) / h
        face = np.argmax(np.abs(local), axis=-1)
        normals = np.zeros_like(dirs)
        normals[np.arange(len(dirs)), face] = np.sign(local[np.arange(len(dirs)), face])
        return t, normals

    def albedo(self, points: np.ndarray, normals: np.ndarray) -> np.ndarray:
        local = points - np.asarray(self.center)
        face = np.argmax(np.abs(normals), axis=-1)
        # 면마다 남은 두 축을 (u, v) 로 쓴다
        u = np.where(face == 0, local[:, 2], local[:, 0])
        v = np.where(face == 1, local[:, 2], local[:, 1])
        return self.texture.lookup(u, v, (max(self.half_size), max(self.half_size)))

    def to_dict(self) -> Dict:
        out = asdict(self)
        out["texture"] = self.texture.to_dict()
        return out


@dataclass
class Sphere:
    center: Tuple[float, float, float]
    radius: float
    texture: Texture = field(default_factory=Texture)

    def __post_init__(self):
        if self.radius <= 0:
            raise InputError(f"구 반지름은 양수여야 합니다: {self.radius}")

    def intersect(self, origins: np.ndarray, dirs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        oc = origins - np.asarray(self.center)
        b = np.sum(oc * dirs, axis=-1)
        c = np.sum(oc * oc, axis=-1) - self.radius**2
        disc = b * b - c
        root = np.sqrt(np.maximum(disc, 0.0))
        t_near = -b - root
        t_far = -b + root
        t = np.where(t_near > HIT_EPS, t_near, t_far)
        valid = (disc >= 0) & (t > HIT_EPS)
        t = np.where(valid, t, np.inf)
        hit = origins + np.where(valid, t, 0.0)[:, None] * dirs
        normals = (hit - np.asarray(self.center)) / self.radius
        return t, normals

    def albedo(self, points: np.ndarray, normals: np.ndarray) -> np.ndarray:
        # 경위도 좌표를 반지름 배율 cm 로
        lon = np.arctan2(normals[:, 0], normals[:, 2]) * self.radius
        lat = np.arcsin(np.clip(normals[:, 1], -1.0, 1.0)) * self.radius
        return self.texture.lookup(lon, lat, (np.pi * self.radius, 0.5 * np.pi * self.radius))

    def to_dict(self) -> Dict:
        out = asdict(self)
        out["texture"] = self.texture.to_dict()
        return out


@dataclass
class GlassSlab:
    """
    평행면 유리판.
    point 는 바깥 면의 중심, normal 은 바깥쪽 단위 법선, 안쪽 면은 point - thickness·normal.
    """

    point: Tuple[float, float, float]
    normal: Tuple[float, float, float]
    thickness: float = 1.0
    ior: float = 1.45
    half_extents: Tuple[float, float] = (8.0, 8.0)

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=np.float64)
        if abs(np.linalg.norm(n) - 1.0) > 1e-6:
            raise InputError(f"유리판 법선은 단위 벡터여야 합니다: {self.normal}")
        if self.thickness <= 0:
            raise InputError(f"유리 두께는 양수여야 합니다: {self.thickness}")
        if self.ior <= 1.0:
            raise InputError(f"굴절률은 1 보다 커야 합니다: {self.ior}")
        if min(self.half_extents) <= 0:
            raise InputError(f"유리판 크기는 양수여야 합니다: {self.half_extents}")

    @property
    def normal_vec(self) -> np.ndarray:
        return np.asarray(self.normal, dtype=np.float64)

    @property
    def point_vec(self) -> np.ndarray:
        return np.asarray(self.point, dtype=np.float64)

    @property
    def inner_point(self) -> np.ndarray:
        return self.point_vec - self.thickness * self.normal_vec

    @property
    def basis(self) -> Tuple[np.ndarray, np.ndarray]:
        return _basis(self.normal_vec)

    def faces(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        """(면 중심, 바깥 법선) 두 경계 평면"""
        n = self.normal_vec
        return [(self.point_vec, n), (self.inner_point, -n)]

    def within_extents(self, points: np.ndarray) -> np.ndarray:
        u, v = self.basis
        rel = points - self.point_vec
        return (np.abs(rel @ u) <= self.half_extents[0]) & (np.abs(rel @ v) <= self.half_extents[1])

    def sample_surface(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """두 경계 면 위에서 균일하게 뽑은 점 (2·count, 3)"""
        u, v = self.basis
        points = []
        for center, _ in self.faces():
            a = rng.uniform(-self.half_extents[0], self.half_extents[0], size=(count, 1))
            b = rng.uniform(-self.half_extents[1], self.half_extents[1], size=(count, 1))
            points.append(center + a * u + b * v)
        return np.concatenate(points, axis=0)

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass
class AreaLight:
    """천장/전면 조명 패널. 직접 보이면 emission, 반사 하이라이트의 원천"""

    panel: Quad
    ambient: float = 0.35
    diffuse: float = 0.65

    def __post_init__(self):
        if self.panel.emission <= 0:
            raise InputError(f"조명 세기는 양수여야 합니다: {self.panel.emission}")
        if self.ambient < 0 or self.diffuse < 0 or self.ambient + self.diffuse > 1.0 + 1e-9:
            raise InputError("ambient + diffuse 는 [0, 1] 범위여야 합니다")

    @property
    def position(self) -> np.ndarray:
        k = AXES[self.panel.axis]
        i, j = self.panel.plane_axes
        pos = np.zeros(3)
        pos[k] = self.panel.offset
        pos[i], pos[j] = self.panel.center
        return pos

    def to_dict(self) -> Dict:
        return {"panel": self.panel.to_dict(), "ambient": self.ambient, "diffuse": self.diffuse}


@dataclass
class SceneSpec:
    name: str
    slabs: List[GlassSlab]
    walls: List[Quad]
    objects: list
    light: AreaLight
    reflectivity: float = 1.0  # 프레넬 반사에 곱하는 배율
    background: Tuple[float, float, float] = (1.0, 1.0, 1.0)  # 아무것도 맞지 않은 1차 광선
    environment: Tuple[float, float, float] = (0.1, 0.1, 0.1)  # 아무것도 맞지 않은 반사 광선

    def __post_init__(self):
        if not 0.0 <= self.reflectivity <= 1.0:
            raise InputError(f"반사 배율은 [0, 1] 이어야 합니다: {self.reflectivity}")

    def opaque_surfaces(self) -> list:
        return list(self.walls) + list(self.objects) + [self.light.panel]

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "slabs": [s.to_dict() for s in self.slabs],
            "walls": [w.to_dict() for w in self.walls],
            "objects": [{"type": type(o).__name__.lower(), **o.to_dict()} for o in self.objects],
            "light": self.light.to_dict(),
            "reflectivity": self.reflectivity,
            "background": list(self.background),
            "environment": list(self.environment),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "SceneSpec":
        def quad(d):
            d = dict(d)
            return Quad(texture=Texture(**d.pop("texture", {})), **d)

        objects = []
        for obj in data.get("objects", []):
            obj = dict(obj)
            kind = obj.pop("type", "box")
            texture = Texture(**obj.pop("texture", {}))
            if kind == "box":
                objects.append(Box(texture=texture, **obj))
            elif kind == "sphere":
                objects.append(Sphere(texture=texture, **obj))
            else:
                raise InputError(f"알 수 없는 물체 종류: {kind}")
        light = dict(data["light"])
        return cls(
            name=data.get("name", "custom"),
            slabs=[GlassSlab(**s) for s in data.get("slabs", [])],
            walls=[quad(w) for w in data.get("walls", [])],
            objects=objects,
            light=AreaLight(panel=quad(light.pop("panel")), **light),
            reflectivity=data.get("reflectivity", 1.0),
            background=tuple(data.get("background", (1.0, 1.0, 1.0))),
            environment=tuple(data.get("environment", (0.1, 0.1, 0.1))),
        )
