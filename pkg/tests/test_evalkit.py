# tests/test_evalkit.py
import json
from types import SimpleNamespace

import numpy as np
import pytest
from skimage.metrics import structural_similarity

from src.autodiff.tensor import Tensor
from src.evalkit.glass_surface import (
    GlassPointCloud,
    GlassPointCollector,
    extract_glass_surface,
    fit_plane,
    group_by_slab,
    plane_normal_error,
    point_distances,
    surface_error,
)
from src.evalkit.metrics import highlight_overlap, image_metrics, psnr, ssim
from src.evalkit.report import REPORT_NAME, VIEWS_NAME, MetricReport, evaluate_model, write_point_cloud_html
from src.oracle.scene import GlassSlab
from src.renderer.pipeline import GlassNerfRenderer, RenderConfig
from src.utils.data_loader import load_dataset
from src.utils.errors import DatasetError, EmptyPointCloudError, InputError, ShapeError


def slab_at(point=(0.0, 0.0, 0.0), normal=(0.0, 0.0, 1.0), extents=(5.0, 5.0)):
    return GlassSlab(point, normal, 1.0, 1.45, extents)


def fake_output(weights, offsets, positions):
    fine = SimpleNamespace(
        refraction_weights=Tensor(np.asarray(weights, dtype=np.float64)),
        offsets=Tensor(np.asarray(offsets, dtype=np.float64)),
        positions=np.asarray(positions, dtype=np.float64),
    )
    return SimpleNamespace(fine=fine, coarse=fine)


# ----------------------------------------------------------------------
# PSNR / SSIM
# ----------------------------------------------------------------------
def test_psnr_closed_forms():
    a = np.zeros((4, 4, 3))
    assert psnr(a, a + 0.1) == pytest.approx(20.0)
    assert psnr(a, a + 0.01) == pytest.approx(40.0)
    assert psnr(a, a) == float("inf")
    b = np.random.default_rng(0).random((4, 4, 3))
    assert psnr(a, b) == psnr(b, a)


def test_psnr_rejects_size_mismatch():
    with pytest.raises(ShapeError):
        psnr(np.zeros((4, 4, 3)), np.zeros((4, 5, 3)))


def test_ssim_of_identical_images_is_one():
    image = np.random.default_rng(1).random((24, 24, 3))
    assert ssim(image, image) == pytest.approx(1.0)


def test_ssim_matches_reference_implementation():
    rng = np.random.default_rng(2)
    a = rng.random((32, 32))
    b = np.clip(a + rng.normal(scale=0.1, size=a.shape), 0.0, 1.0)
    expected = structural_similarity(
        a, b, gaussian_weights=True, sigma=1.5, use_sample_covariance=False, data_range=1.0
    )
    assert ssim(a, b) == pytest.approx(expected, abs=1e-6)

    flat = structural_similarity(
        np.full((16, 16), 0.5), np.zeros((16, 16)),
        gaussian_weights=True, sigma=1.5, use_sample_covariance=False, data_range=1.0,
    )
    assert ssim(np.full((16, 16), 0.5), np.zeros((16, 16))) == pytest.approx(flat, abs=1e-6)


def test_ssim_is_symmetric():
    rng = np.random.default_rng(3)
    a, b = rng.random((20, 20, 3)), rng.random((20, 20, 3))
    assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)


def test_ssim_rejects_images_smaller_than_window():
    with pytest.raises(InputError):
        ssim(np.zeros((8, 8)), np.zeros((8, 8)))


def test_image_metrics_quantize_by_default():
    a = np.full((16, 16, 3), 0.5)
    b = a + 1e-4
    value_psnr, value_ssim = image_metrics(a, b)
    assert value_psnr == float("inf") and value_ssim == pytest.approx(1.0)
    assert np.isfinite(image_metrics(a, b, quantized=False)[0])


# ----------------------------------------------------------------------
# 표면 오차
# ----------------------------------------------------------------------
def test_points_on_faces_have_zero_error():
    slab = slab_at()
    points = slab.sample_surface(50, np.random.default_rng(0))
    assert surface_error(points, [slab]).mean == pytest.approx(0.0, abs=1e-12)


def test_offset_points_measure_distance_to_nearest_face():
    slab = slab_at()
    points = np.array([[0.0, 0.0, 0.3], [1.0, 1.0, -1.3], [2.0, 0.0, -0.5]])
    result = surface_error(GlassPointCloud(points, np.ones(3)), [slab])
    np.testing.assert_allclose(point_distances(points, [slab]), [0.3, 0.3, 0.5], atol=1e-12)
    assert result.mean == pytest.approx((0.3 + 0.3 + 0.5) / 3)
    assert result.median == pytest.approx(0.3)
    assert result.count == 3


def test_points_beyond_extents_measure_to_rectangle_edge():
    slab = slab_at(extents=(1.0, 1.0))
    d = point_distances(np.array([[4.0, 0.0, 0.0]]), [slab])
    assert d[0] == pytest.approx(3.0)


def test_surface_error_is_translation_equivariant():
    rng = np.random.default_rng(4)
    points = rng.normal(size=(40, 3))
    normal = np.array([0.2, -0.3, 0.9])
    normal /= np.linalg.norm(normal)
    shift = np.array([12.0, -7.5, 30.0])
    base = surface_error(points, [slab_at(normal=tuple(normal))]).mean
    moved = surface_error(points + shift, [slab_at(point=tuple(shift), normal=tuple(normal))]).mean
    assert abs(base - moved) <= 1e-12


def test_empty_cloud_rejected():
    with pytest.raises(EmptyPointCloudError):
        surface_error(np.zeros((0, 3)), [slab_at()])
    with pytest.raises(InputError):
        point_distances(np.zeros((1, 3)), [])


def test_fit_plane_recovers_normal():
    rng = np.random.default_rng(5)
    normal = np.array([0.0, 0.6, 0.8])
    u = np.array([1.0, 0.0, 0.0])
    v = np.cross(normal, u)
    points = rng.uniform(-3, 3, size=(200, 1)) * u + rng.uniform(-3, 3, size=(200, 1)) * v + 2.0 * normal
    fitted, center = fit_plane(points)
    assert abs(fitted @ normal) == pytest.approx(1.0, abs=1e-9)
    assert plane_normal_error(points, [slab_at(normal=tuple(normal))]) == pytest.approx(0.0, abs=1e-4)
    with pytest.raises(EmptyPointCloudError):
        fit_plane(points[:2])
    assert plane_normal_error(points[:2], [slab_at()]) is None


def test_group_by_slab_assigns_nearest():
    near, far = slab_at(), slab_at(point=(0.0, 0.0, 20.0))
    groups = group_by_slab(np.array([[0.0, 0.0, 0.1], [0.0, 0.0, 19.5]]), [near, far])
    assert [len(g) for g in groups] == [1, 1]


# ----------------------------------------------------------------------
# 포인트 추출
# ----------------------------------------------------------------------
def test_collector_threshold_is_strict():
    collector = GlassPointCollector(threshold=0.5)
    positions = np.arange(6.0).reshape(1, 2, 3)
    offsets = np.array([[[0.5, 0.0, 0.0], [0.0, 0.6, 0.0]]])
    collector(fake_output(np.ones((1, 2)), offsets, positions), slice(0, 1))
    cloud = collector.cloud()
    np.testing.assert_array_equal(cloud.points, [[3.0, 4.0, 5.0]])
    np.testing.assert_allclose(cloud.magnitudes, [0.6])
    assert collector.mean_magnitude == pytest.approx(0.55)


def test_collector_orders_chunks_across_views():
    collector = GlassPointCollector(threshold=0.1)
    offsets = np.ones((1, 1, 3))
    collector.next_view(4)
    collector(fake_output(np.ones((1, 1)), offsets, [[[2.0, 2.0, 2.0]]]), slice(0, 1))
    collector(fake_output(np.ones((1, 1)), offsets, [[[9.0, 9.0, 9.0]]]), slice(3, 4))
    np.testing.assert_array_equal(collector.cloud().points, [[2.0, 2.0, 2.0], [9.0, 9.0, 9.0]])


def test_collector_rejects_non_positive_threshold():
    with pytest.raises(InputError):
        GlassPointCollector(threshold=0.0)


def test_untrained_model_extracts_no_points(tiny_model, two_rays):
    renderer = GlassNerfRenderer(tiny_model, RenderConfig(n_coarse=4, n_fine_glass=2, n_fine_vi=2, perturb=False))
    cloud = extract_glass_surface(renderer, two_rays)
    assert len(cloud) == 0


def test_point_cloud_xyz_round_trip(tmp_path):
    cloud = GlassPointCloud(np.array([[1.0, 2.0, 3.0], [4.5, 5.5, 6.5]]), np.ones(2))
    cloud.save_xyz(str(tmp_path / "points.xyz"))
    np.testing.assert_allclose(GlassPointCloud.load_xyz(str(tmp_path / "points.xyz")).points, cloud.points)


def test_point_cloud_html(tmp_path):
    cloud = GlassPointCloud(np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]), np.ones(2))
    path = write_point_cloud_html(str(tmp_path / "cloud.html"), cloud, truth=np.zeros((3, 3)))
    assert "plotly" in open(path, encoding="utf-8").read().lower()


# ----------------------------------------------------------------------
# 리포트
# ----------------------------------------------------------------------
def test_report_serialises_infinite_psnr(tmp_path):
    report = MetricReport(views=[{"file_path": "test/r_000.png", "psnr": float("inf"), "ssim": 1.0}])
    report.save(str(tmp_path))
    data = json.loads((tmp_path / REPORT_NAME).read_text(encoding="utf-8"))
    assert data["views"][0]["psnr"] == "inf"
    assert data["mean_psnr"] == "inf"
    assert data["surface_error"] is None
    assert (tmp_path / VIEWS_NAME).read_text().splitlines()[0] == "file_path,psnr,ssim"


def test_evaluate_untrained_model_skips_surface_metrics(tiny_model, tiny_dataset_dir, tmp_path):
    dataset = load_dataset(tiny_dataset_dir)
    renderer = GlassNerfRenderer(tiny_model, RenderConfig(n_coarse=4, n_fine_glass=2, n_fine_vi=2, perturb=False))
    report, cloud = evaluate_model(renderer, dataset, grid_dir=str(tmp_path / "grids"))
    assert len(report.views) == 1
    assert np.isfinite(report.mean_psnr) and -1.0 <= report.mean_ssim <= 1.0
    assert len(cloud) == 0 and report.surface is None
    assert (tmp_path / "grids" / "r_000_grid.png").exists()


def test_evaluate_requires_loaded_images(tiny_model, tiny_dataset_dir):
    dataset = load_dataset(tiny_dataset_dir, load_images=False)
    with pytest.raises(DatasetError):
        evaluate_model(GlassNerfRenderer(tiny_model), dataset)


def test_highlight_overlap():
    reference = np.zeros((6, 6, 3))
    reference[1:3, 1:3] = 0.8
    predicted = np.zeros((6, 6, 3))
    predicted[1:3, 1:4] = 0.4
    iou, energy = highlight_overlap(predicted, reference)
    assert iou == pytest.approx(4 / 6)
    assert energy == pytest.approx(0.5)
    assert all(np.isnan(v) for v in highlight_overlap(predicted, np.zeros((6, 6, 3))))


def test_highlight_energy_ignores_prediction_outside_truth():
    reference = np.zeros((6, 6, 3))
    reference[1:3, 1:3] = 0.8
    predicted = np.zeros((6, 6, 3))
    predicted[1:3, 1:3] = 0.72
    _, energy = highlight_overlap(predicted, reference)
    assert energy == pytest.approx(0.9)
    predicted[4:6, 4:6] = 1.0
    iou, spilled = highlight_overlap(predicted, reference)
    assert spilled == pytest.approx(0.9)
    assert iou == pytest.approx(4 / 8)
