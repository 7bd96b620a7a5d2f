# -*- coding: utf-8 -*-
from src.renderer.rays import Camera, Ray, RayBatch, generate_rays, image_pixels
from src.renderer.sampling import SampleBatch, hierarchical_resample, stratified_sample
from src.renderer.volume import (
    accumulate_offsets,
    composite,
    refraction_weights,
    render_feature,
    render_view_independent,
)
from src.renderer.pipeline import (
    CompositeOutput,
    GlassNerfRenderer,
    ImageRender,
    RenderConfig,
    RenderOutput,
    render_image,
    render_pixel,
)
