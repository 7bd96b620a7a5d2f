# -*- coding: utf-8 -*-
from src.evalkit.metrics import highlight_overlap, image_metrics, mse, psnr, ssim
from src.evalkit.glass_surface import (
    DEFAULT_THRESHOLD,
    GlassPointCloud,
    GlassPointCollector,
    SurfaceError,
    extract_glass_surface,
    fit_plane,
    surface_error,
)
from src.evalkit.report import MetricReport, evaluate_model, write_point_cloud_html
