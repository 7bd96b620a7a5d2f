# src/oracle/tracer.py
"""
해석적 광선 추적기.
유리판 통과는 정확한 스넬 굴절, 반사는 입사 면에서의 단일 바운스 + Schlick 프레넬.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.oracle.optics import reflect, refract, schlick_fresnel
from src.oracle.scene import GlassSlab, SceneSpec
from src.renderer.rays import Camera, Ray, image_pixels, world_rays

logger = logging.getLogger(__name__)

GRAZING_EPS = 1e-12
DEFAULT_MAX_TRAVERSALS = 8


@dataclass
class SlabTrace:
    """유리판 하나를 통과한 결과. hit 가 False 면 광선은 그대로 지나간다"""

    hit: bool
    exit_origin: np.ndarray
    exit_direction: np.ndarray
    entry_point: np.ndarray = None
    inner_direction: np.ndarray = None
    inside_length: float = 0.0
    cos_incidence: float = 1.0


@dataclass
class TraceResult:
    rgb: np.ndarray  # (R, 3) ∈ [0,1]
    depth: np.ndarray  # (R,) cm, 아무것도 맞지 않으면 0
    reflection: np.ndarray  # (R, 3) 반사 성분만
    truncated: np.ndarray  # (R,) 통과 횟수 한도로 잘린 광선
    traversals: np.ndarray  # (R,) 통과한 유리판 수


def slab_entries(slab: GlassSlab, origins: np.ndarray, dirs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    유리판 바깥에서 들어오는 광선의 입사 거리와 광선을 마주 보는 면 법선.
    바깥 면(앞)과 안쪽 면(뒤) 모두 입사 면이 될 수 있다.
    """
    n = slab.normal_vec
    s0 = (origins - slab.point_vec) @ n
    dn = dirs @ n
    with np.errstate(divide="ignore", invalid="ignore"):
        t_front = np.where((s0 >= 0) & (dn < -GRAZING_EPS), s0 / -dn, np.inf)
        t_back = np.where((s0 <= -slab.thickness) & (dn > GRAZING_EPS), (-slab.thickness - s0) / dn, np.inf)
    from_front = t_front <= t_back
    t = np.where(from_front, t_front, t_back)
    hits = origins + np.where(np.isfinite(t), t, 0.0)[:, None] * dirs
    valid = np.isfinite(t) & (t > 0) & slab.within_extents(hits)
    face_normals = np.where(from_front[:, None], n, -n)
    return np.where(valid, t, np.inf), face_normals


def cross_slab(slab: GlassSlab, entry_points: np.ndarray, dirs: np.ndarray, face_normals: np.ndarray):
    """입사점에서 굴절 → 반대 면까지 진행 → 다시 굴절. (출구점, 출구 방향, 내부 경로 길이, 내부 방향)"""
    inner, _ = refract(dirs, face_normals, 1.0 / slab.ior)
    along = -np.sum(inner * face_normals, axis=-1)
    inside = slab.thickness / along
    exit_points = entry_points + inside[:, None] * inner
    # 평행면이므로 공기에서 들어온 광선은 출구에서 전반사하지 않는다
    exit_dirs, _ = refract(inner, face_normals, slab.ior)
    return exit_points, exit_dirs, inside, inner


def trace_through_slab(ray: Ray, slab: GlassSlab) -> SlabTrace:
    """광선 하나를 유리판에 통과시킨다. 스치거나 맞지 않으면 광선을 그대로 돌려준다"""
    origins = ray.origin[None, :]
    dirs = ray.direction[None, :]
    t, face_normals = slab_entries(slab, origins, dirs)
    if not np.isfinite(t[0]):
        return SlabTrace(False, ray.origin.copy(), ray.direction.copy())
    entry = origins + t[:, None] * dirs
    exit_points, exit_dirs, inside, inner = cross_slab(slab, entry, dirs, face_normals)
    return SlabTrace(
        hit=True,
        exit_origin=exit_points[0],
        exit_direction=exit_dirs[0],
        entry_point=entry[0],
        inner_direction=inner[0],
        inside_length=float(inside[0]),
        cos_incidence=float(-dirs[0] @ face_normals[0]),
    )


def measured_lateral_shift(trace: SlabTrace, direction: np.ndarray) -> float:
    """출구점과 원래 직선 사이의 수직 거리"""
    if not trace.hit:
        return 0.0
    rel = trace.exit_origin - trace.entry_point
    return float(np.linalg.norm(rel - (rel @ direction) * direction))


class SceneTracer:
    """SceneSpec 에 대한 벡터화 추적기"""

    def __init__(self, scene: SceneSpec, max_traversals: int = DEFAULT_MAX_TRAVERSALS):
        self.scene = scene
        self.max_traversals = max_traversals
        self.surfaces = scene.opaque_surfaces()
        self.light_index = len(self.surfaces) - 1

    def nearest_opaque(self, origins: np.ndarray, dirs: np.ndarray):
        best_t = np.full(len(origins), np.inf)
        best_n = np.zeros_like(dirs)
        best_id = np.full(len(origins), -1)
        for k, surface in enumerate(self.surfaces):
            t, normals = surface.intersect(origins, dirs)
            closer = t < best_t
            best_t = np.where(closer, t, best_t)
            best_n = np.where(closer[:, None], normals, best_n)
            best_id = np.where(closer, k, best_id)
        return best_t, best_n, best_id

    def nearest_slab(self, origins: np.ndarray, dirs: np.ndarray):
        best_t = np.full(len(origins), np.inf)
        best_n = np.zeros_like(dirs)
        best_id = np.full(len(origins), -1)
        for k, slab in enumerate(self.scene.slabs):
            t, normals = slab_entries(slab, origins, dirs)
            closer = t < best_t
            best_t = np.where(closer, t, best_t)
            best_n = np.where(closer[:, None], normals, best_n)
            best_id = np.where(closer, k, best_id)
        return best_t, best_n, best_id

    def shade(self, origins: np.ndarray, dirs: np.ndarray, miss_color) -> Tuple[np.ndarray, np.ndarray]:
        """불투명 표면의 색 (Lambert + 앰비언트, 조명 패널은 발광). (색, 거리)"""
        t, normals, ids = self.nearest_opaque(origins, dirs)
        colors = np.broadcast_to(np.asarray(miss_color, dtype=np.float64), dirs.shape).copy()
        light = self.scene.light
        for k, surface in enumerate(self.surfaces):
            mask = ids == k
            if not np.any(mask):
                continue
            if k == self.light_index:
                colors[mask] = light.panel.emission
                continue
            points = origins[mask] + t[mask, None] * dirs[mask]
            n = normals[mask]
            n = np.where((np.sum(n * dirs[mask], axis=-1) > 0)[:, None], -n, n)
            to_light = light.position - points
            to_light /= np.linalg.norm(to_light, axis=-1, keepdims=True)
            lambert = np.maximum(np.sum(n * to_light, axis=-1), 0.0)
            albedo = surface.albedo(points, normals[mask])
            colors[mask] = albedo * (light.ambient + light.diffuse * lambert)[:, None]
        return colors, t

    def trace(self, origins: np.ndarray, dirs: np.ndarray) -> TraceResult:
        origins = np.asarray(origins, dtype=np.float64).reshape(-1, 3).copy()
        dirs = np.asarray(dirs, dtype=np.float64).reshape(-1, 3).copy()
        n_rays = len(origins)
        rgb = np.zeros((n_rays, 3))
        reflection = np.zeros((n_rays, 3))
        depth = np.zeros(n_rays)
        path = np.zeros(n_rays)
        throughput = np.ones(n_rays)
        traversals = np.zeros(n_rays, dtype=int)
        truncated = np.zeros(n_rays, dtype=bool)
        active = np.ones(n_rays, dtype=bool)
        scene = self.scene

        for step in range(self.max_traversals + 1):
            idx = np.nonzero(active)[0]
            if len(idx) == 0:
                break
            o, d = origins[idx], dirs[idx]
            t_opaque, _, _ = self.nearest_opaque(o, d)
            t_glass, face_n, slab_id = self.nearest_slab(o, d)
            through = t_glass < t_opaque
            if step == self.max_traversals:
                truncated[idx[through]] = True
                through = np.zeros_like(through)

            done = idx[~through]
            if len(done):
                colors, t_hit = self.shade(origins[done], dirs[done], scene.background)
                rgb[done] += throughput[done, None] * colors
                depth[done] = np.where(np.isfinite(t_hit), path[done] + t_hit, 0.0)
                active[done] = False

            g = idx[through]
            if len(g) == 0:
                continue
            gd = dirs[g]
            entry = origins[g] + t_glass[through, None] * gd
            normals = face_n[through]
            ids = slab_id[through]
            cos_i = -np.sum(gd * normals, axis=-1)

            fresnel = np.zeros(len(g))
            exit_points = np.zeros_like(entry)
            exit_dirs = np.zeros_like(gd)
            inside = np.zeros(len(g))
            for k, slab in enumerate(scene.slabs):
                m = ids == k
                if not np.any(m):
                    continue
                fresnel[m] = schlick_fresnel(cos_i[m], 1.0, slab.ior)
                exit_points[m], exit_dirs[m], inside[m], _ = cross_slab(slab, entry[m], gd[m], normals[m])

            weight = scene.reflectivity * fresnel
            if scene.reflectivity > 0:
                mirrored, _ = self.shade(entry, reflect(gd, normals), scene.environment)
                contribution = (throughput[g] * weight)[:, None] * mirrored
                rgb[g] += contribution
                reflection[g] += contribution
            throughput[g] *= 1.0 - weight
            path[g] += t_glass[through] + inside
            origins[g] = exit_points
            dirs[g] = exit_dirs
            traversals[g] += 1

        if np.any(truncated):
            logger.debug("통과 한도 %d 에서 잘린 광선 %d 개", self.max_traversals, int(truncated.sum()))
        return TraceResult(
            rgb=np.clip(rgb, 0.0, 1.0),
            depth=depth,
            reflection=np.clip(reflection, 0.0, 1.0),
            truncated=truncated,
            traversals=traversals,
        )


def trace_scene(ray: Ray, scene: SceneSpec, max_traversals: int = DEFAULT_MAX_TRAVERSALS):
    """광선 하나의 (RGB, depth, 반사 전용 RGB)"""
    result = SceneTracer(scene, max_traversals).trace(ray.origin[None, :], ray.direction[None, :])
    return result.rgb[0], float(result.depth[0]), result.reflection[0]


@dataclass
class OracleView:
    rgb: np.ndarray  # (H, W, 3)
    depth: np.ndarray  # (H, W)
    reflection: np.ndarray  # (H, W, 3)
    truncated_rays: int


def render_view(scene: SceneSpec, camera: Camera, max_traversals: int = DEFAULT_MAX_TRAVERSALS) -> OracleView:
    origins, dirs = world_rays(camera, image_pixels(camera))
    result = SceneTracer(scene, max_traversals).trace(origins, dirs)
    h, w = camera.height, camera.width
    return OracleView(
        rgb=result.rgb.reshape(h, w, 3),
        depth=result.depth.reshape(h, w),
        reflection=result.reflection.reshape(h, w, 3),
        truncated_rays=int(result.truncated.sum()),
    )
