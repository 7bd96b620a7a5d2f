# -*- coding: utf-8 -*-
from src.oracle.optics import lateral_shift, reflect, refract, schlick_fresnel, snell_refract
from src.oracle.scene import AreaLight, Box, GlassSlab, Quad, SceneSpec, Sphere, Texture
from src.oracle.presets import PRESETS, Trajectory, build_preset, default_trajectory, orbit_poses
from src.oracle.tracer import (
    OracleView,
    SceneTracer,
    SlabTrace,
    render_view,
    trace_scene,
    trace_through_slab,
)
