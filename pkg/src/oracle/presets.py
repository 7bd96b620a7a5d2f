# src/oracle/presets.py
"""
내장 장면 프리셋과 카메라 궤도.
모든 치수는 cm, 유리는 두께 1 cm · 굴절률 1.45.
"""

from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from src.oracle.scene import AreaLight, Box, GlassSlab, Quad, SceneSpec, Sphere, Texture
from src.utils.errors import InputError

GLASS_THICKNESS = 1.0
GLASS_IOR = 1.45


@dataclass
class Trajectory:
    """look_at 을 향하는 안쪽 방향 궤도. 각도는 도 단위"""

    radius: float = 30.0
    look_at: tuple = (0.0, 0.0, 0.0)
    azimuth_range: float = 20.0
    elevation_range: float = 20.0
    camera_angle_x: float = 0.6
    near: float = 10.0
    far: float = 60.0

    def to_dict(self) -> Dict:
        return asdict(self)


def look_at_pose(position: np.ndarray, target: np.ndarray, up=(0.0, 1.0, 0.0)) -> np.ndarray:
    """OpenGL 관례 c2w (카메라 -z 가 target 을 향함)"""
    position = np.asarray(position, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - position
    forward /= np.linalg.norm(forward)
    right = np.cross(forward, np.asarray(up, dtype=np.float64))
    right /= np.linalg.norm(right)
    true_up = np.cross(right, forward)
    c2w = np.eye(4)
    c2w[:3, 0] = right
    c2w[:3, 1] = true_up
    c2w[:3, 2] = -forward
    c2w[:3, 3] = position
    return c2w


def orbit_poses(trajectory: Trajectory, count: int, rng: np.random.Generator) -> List[np.ndarray]:
    azimuth = np.radians(rng.uniform(-trajectory.azimuth_range, trajectory.azimuth_range, size=count))
    elevation = np.radians(rng.uniform(-trajectory.elevation_range, trajectory.elevation_range, size=count))
    target = np.asarray(trajectory.look_at, dtype=np.float64)
    poses = []
    for az, el in zip(azimuth, elevation):
        offset = trajectory.radius * np.array(
            [np.cos(el) * np.sin(az), np.sin(el), np.cos(el) * np.cos(az)]
        )
        poses.append(look_at_pose(target + offset, target))
    return poses


def _front_light(z: float, y: float, half: float = 6.0, emission: float = 6.0) -> AreaLight:
    """카메라 위쪽 앞에 놓인 조명 패널. 유리 반사 하이라이트를 만든다"""
    panel = Quad(axis="z", offset=z, center=(0.0, y), half_extents=(half, 3.0), emission=emission)
    return AreaLight(panel=panel)


def _room(half_x: float, floor_y: float, ceiling_y: float, back_z: float, front_z: float,
          textures: Dict[str, Texture]) -> List[Quad]:
    """앞이 열린 방 (뒤, 바닥, 천장, 좌, 우)"""
    cy, hy = 0.5 * (floor_y + ceiling_y), 0.5 * (ceiling_y - floor_y)
    cz, hz = 0.5 * (back_z + front_z), 0.5 * (front_z - back_z)
    return [
        Quad("z", back_z, (0.0, cy), (half_x, hy), textures["back"]),
        Quad("y", floor_y, (0.0, cz), (half_x, hz), textures["floor"]),
        Quad("y", ceiling_y, (0.0, cz), (half_x, hz), textures["ceiling"]),
        Quad("x", -half_x, (cy, cz), (hy, hz), textures["left"]),
        Quad("x", half_x, (cy, cz), (hy, hz), textures["right"]),
    ]


def slab_checker() -> SceneSpec:
    """체커 벽 앞의 유리판 한 장, 상자와 구"""
    textures = {
        "back": Texture("checker", (0.9, 0.9, 0.85), (0.15, 0.2, 0.45), scale=2.0),
        "floor": Texture("gradient", (0.55, 0.4, 0.3), (0.8, 0.7, 0.55)),
        "ceiling": Texture("solid", (0.85, 0.85, 0.85)),
        "left": Texture("checker", (0.8, 0.3, 0.3), (0.95, 0.9, 0.9), scale=3.0),
        "right": Texture("checker", (0.3, 0.7, 0.35), (0.95, 0.95, 0.9), scale=3.0),
    }
    objects = [
        Box((-3.5, -7.0, -4.0), (2.0, 3.0, 2.0), Texture("checker", (0.95, 0.75, 0.2), (0.6, 0.2, 0.1), scale=1.0)),
        Sphere((3.5, -7.0, -2.0), 3.0, Texture("gradient", (0.2, 0.5, 0.9), (0.9, 0.2, 0.6))),
    ]
    slab = GlassSlab((0.0, 0.0, 5.0), (0.0, 0.0, 1.0), GLASS_THICKNESS, GLASS_IOR, (8.0, 8.0))
    return SceneSpec(
        name="slab-checker",
        slabs=[slab],
        walls=_room(10.0, -10.0, 10.0, -10.0, 10.0, textures),
        objects=objects,
        light=_front_light(20.0, 12.0),
    )


def no_glass() -> SceneSpec:
    """slab-checker 에서 유리판만 뺀 장면"""
    scene = slab_checker()
    scene.name = "no-glass"
    scene.slabs = []
    return scene


def _case_slabs(half: float, bottom: float) -> List[GlassSlab]:
    """다섯 면 유리 진열장 (앞, 뒤, 좌, 우, 위). 바닥은 열려 있다"""
    height = 0.5 * (half - bottom)
    mid_y = 0.5 * (half + bottom)
    sides = [
        ((0.0, mid_y, half), (0.0, 0.0, 1.0), (half, height)),
        ((0.0, mid_y, -half), (0.0, 0.0, -1.0), (half, height)),
        ((-half, mid_y, 0.0), (-1.0, 0.0, 0.0), (half, height)),
        ((half, mid_y, 0.0), (1.0, 0.0, 0.0), (half, height)),
        ((0.0, half, 0.0), (0.0, 1.0, 0.0), (half, half)),
    ]
    return [GlassSlab(p, n, GLASS_THICKNESS, GLASS_IOR, ext) for p, n, ext in sides]


def _case_objects() -> list:
    return [
        Box((0.0, -4.5, 0.0), (2.5, 1.5, 2.5), Texture("solid", (0.7, 0.65, 0.6))),
        Sphere((0.0, -0.5, 0.0), 2.5, Texture("checker", (0.95, 0.6, 0.15), (0.3, 0.1, 0.5), scale=1.5)),
    ]


def _house_objects() -> list:
    """상자를 쌓아 만든 집 (몸체, 지붕 두 단, 굴뚝)"""
    return [
        Box((0.0, -3.5, 0.0), (3.0, 2.5, 2.5), Texture("checker", (0.9, 0.85, 0.7), (0.75, 0.55, 0.4), scale=1.0)),
        Box((0.0, -0.5, 0.0), (3.5, 0.5, 3.0), Texture("solid", (0.7, 0.2, 0.15))),
        Box((0.0, 0.5, 0.0), (2.0, 0.5, 1.8), Texture("solid", (0.6, 0.15, 0.1))),
        Box((1.8, 2.0, 0.8), (0.5, 1.0, 0.5), Texture("solid", (0.4, 0.4, 0.45))),
        Box((0.0, -4.8, 2.55), (0.8, 1.2, 0.05), Texture("solid", (0.35, 0.2, 0.1))),
    ]


def _ball_objects() -> list:
    """바닥에 놓인 색 공 넷과 그 위에 얹힌 공 하나"""
    colors = [(0.9, 0.15, 0.15), (0.15, 0.6, 0.9), (0.95, 0.8, 0.1), (0.2, 0.75, 0.3)]
    spots = [(-2.4, -2.4), (2.4, -2.4), (-2.4, 2.4), (2.4, 2.4)]
    balls = [
        Sphere((x, -4.2, z), 1.8, Texture("solid", color)) for (x, z), color in zip(spots, colors)
    ]
    balls.append(Sphere((0.0, -1.6, 0.0), 1.8, Texture("checker", (0.95, 0.95, 0.95), (0.6, 0.2, 0.7), scale=0.8)))
    return balls


def showcase(name: str = "showcase", objects: Optional[list] = None) -> SceneSpec:
    """질감 있는 벽으로 둘러싸인 유리 진열장. objects 를 주면 진열장 안 물체를 바꾼다"""
    textures = {
        "back": Texture("checker", (0.85, 0.85, 0.8), (0.25, 0.3, 0.5), scale=3.0),
        "floor": Texture("checker", (0.6, 0.45, 0.3), (0.4, 0.3, 0.2), scale=4.0),
        "ceiling": Texture("solid", (0.9, 0.9, 0.9)),
        "left": Texture("gradient", (0.8, 0.35, 0.3), (0.95, 0.85, 0.6)),
        "right": Texture("gradient", (0.3, 0.6, 0.8), (0.8, 0.95, 0.85)),
    }
    # 진열장 바닥과 방 바닥은 y=-6
    walls = _room(16.0, -6.0, 16.0, -16.0, 12.0, textures)
    return SceneSpec(
        name=name,
        slabs=_case_slabs(6.0, -6.0),
        walls=walls,
        objects=_case_objects() if objects is None else objects,
        light=_front_light(26.0, 16.0, half=8.0),
    )


def showcase_house() -> SceneSpec:
    return showcase("showcase-house", _house_objects())


def showcase_balls() -> SceneSpec:
    return showcase("showcase-balls", _ball_objects())


def gallery() -> SceneSpec:
    """벽에 그림 같은 절차적 텍스처를 건 진열장 장면"""
    scene = showcase()
    scene.name = "gallery"
    palettes = [
        ((0.85, 0.3, 0.2), (0.15, 0.25, 0.6)),
        ((0.95, 0.8, 0.3), (0.2, 0.5, 0.3)),
        ((0.6, 0.2, 0.6), (0.9, 0.9, 0.7)),
    ]
    painted = []
    for i, wall in enumerate(scene.walls):
        if wall.axis == "y":
            painted.append(wall)
            continue
        a, b = palettes[i % len(palettes)]
        texture = Texture("painting", a, b, seed=11 + i)
        painted.append(Quad(wall.axis, wall.offset, wall.center, wall.half_extents, texture))
    scene.walls = painted
    return scene


PRESETS: Dict[str, Callable[[], SceneSpec]] = {
    "slab-checker": slab_checker,
    "no-glass": no_glass,
    "showcase": showcase,
    "gallery": gallery,
    "showcase-house": showcase_house,
    "showcase-balls": showcase_balls,
}

TRAJECTORIES: Dict[str, Trajectory] = {
    "slab-checker": Trajectory(radius=30.0, look_at=(0.0, -2.0, 0.0), near=10.0, far=60.0),
    "no-glass": Trajectory(radius=30.0, look_at=(0.0, -2.0, 0.0), near=10.0, far=60.0),
    "showcase": Trajectory(radius=38.0, look_at=(0.0, -1.0, 0.0), camera_angle_x=0.7, near=15.0, far=75.0),
    "gallery": Trajectory(radius=38.0, look_at=(0.0, -1.0, 0.0), camera_angle_x=0.7, near=15.0, far=75.0),
    "showcase-house": Trajectory(radius=38.0, look_at=(0.0, -2.0, 0.0), camera_angle_x=0.7, near=15.0, far=75.0),
    "showcase-balls": Trajectory(radius=38.0, look_at=(0.0, -2.5, 0.0), camera_angle_x=0.7, near=15.0, far=75.0),
}


def build_preset(name: str) -> SceneSpec:
    if name not in PRESETS:
        raise InputError(f"알 수 없는 장면 프리셋: {name} (가능: {', '.join(PRESETS)})")
    return PRESETS[name]()


def default_trajectory(name: str) -> Trajectory:
    return TRAJECTORIES.get(name, Trajectory())
