# tests/test_sampling.py
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.renderer.rays import Camera, RayBatch, generate_rays, image_pixels
from src.renderer.sampling import (
    FAR_SENTINEL,
    hierarchical_resample,
    merge_t_values,
    pdf_bin_edges,
    stratified_sample,
)
from src.utils.errors import InputError, ShapeError


def make_rays(count=3, near=2.0, far=6.0):
    dirs = np.tile([0.0, 0.0, -1.0], (count, 1))
    return RayBatch(np.zeros((count, 3)), dirs, near, far)


def test_stratified_samples_stay_in_their_bins():
    rays = make_rays()
    samples = stratified_sample(rays, 8, np.random.default_rng(0))
    width = (6.0 - 2.0) / 8
    bins = np.floor((samples.t_values - 2.0) / width)
    np.testing.assert_array_equal(bins, np.tile(np.arange(8), (3, 1)))
    assert np.all(np.diff(samples.t_values, axis=-1) > 0)
    np.testing.assert_array_equal(samples.deltas[:, -1], FAR_SENTINEL)


def test_stratified_without_rng_uses_bin_centres():
    samples = stratified_sample(make_rays(1), 4)
    np.testing.assert_allclose(samples.t_values, [[2.5, 3.5, 4.5, 5.5]])
    np.testing.assert_allclose(samples.positions[0, :, 2], -samples.t_values[0])


def test_stratified_rejects_single_sample():
    with pytest.raises(InputError):
        stratified_sample(make_rays(), 1)


def test_bin_edges_use_midpoints():
    edges = pdf_bin_edges(np.array([[1.0, 2.0, 4.0]]))
    np.testing.assert_allclose(edges, [[1.0, 1.5, 3.0, 4.0]])


def test_resample_concentrates_on_single_bin():
    t = np.array([[1.0, 2.0, 3.0, 4.0]])
    w = np.array([[0.0, 0.0, 1.0, 0.0]])
    result = hierarchical_resample(t, w, 16, rng=np.random.default_rng(1))
    edges = pdf_bin_edges(t)
    assert np.all(result.t_values >= edges[0, 2]) and np.all(result.t_values <= edges[0, 3])
    assert not result.uniform_fallback[0]


def test_all_zero_weights_fall_back_to_uniform():
    t = np.array([[1.0, 2.0, 3.0, 4.0]])
    result = hierarchical_resample(t, np.zeros_like(t), 8, source="glass")
    assert result.uniform_fallback[0]
    assert np.all((result.t_values >= 1.0) & (result.t_values <= 4.0))
    assert np.all(np.diff(result.t_values, axis=-1) >= 0)


def test_resample_validates_inputs():
    t = np.array([[1.0, 2.0]])
    with pytest.raises(ShapeError):
        hierarchical_resample(t, np.ones((1, 3)), 4)
    with pytest.raises(InputError):
        hierarchical_resample(t, np.array([[1.0, -1.0]]), 4)
    with pytest.raises(InputError):
        hierarchical_resample(t, np.ones((1, 2)), 4, source="reflection")


def test_zero_count_returns_empty():
    result = hierarchical_resample(np.array([[1.0, 2.0]]), np.ones((1, 2)), 0)
    assert result.t_values.shape == (1, 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1), st.integers(min_value=1, max_value=32))
def test_merged_samples_are_sorted_and_inside_range(seed, count):
    rng = np.random.default_rng(seed)
    t = np.sort(rng.uniform(2.0, 6.0, size=(4, 8)), axis=-1)
    w = rng.random((4, 8))
    extra = hierarchical_resample(t, w, count, rng=rng).t_values
    merged = merge_t_values(t, extra, np.zeros((4, 0)))
    assert merged.shape == (4, 8 + count)
    assert np.all(np.diff(merged, axis=-1) > 0)
    assert np.all(extra >= t[:, :1]) and np.all(extra <= t[:, -1:])
    np.testing.assert_array_equal(merged[:, [0, -1]], t[:, [0, -1]])


def test_deterministic_merge_separates_coincident_samples():
    rays = make_rays(2)
    coarse = stratified_sample(rays, 8).t_values
    zeros = np.zeros_like(coarse)
    glass = hierarchical_resample(coarse, zeros, 8, source="glass")
    vi = hierarchical_resample(coarse, zeros, 8, source="view_independent")
    assert glass.uniform_fallback.all()
    np.testing.assert_array_equal(glass.t_values, vi.t_values)

    merged = merge_t_values(coarse, glass.t_values, vi.t_values)
    assert merged.shape == (2, 24)
    assert np.all(np.diff(merged, axis=-1) > 0)
    np.testing.assert_array_equal(merged[:, [0, -1]], coarse[:, [0, -1]])
    np.testing.assert_allclose(merged, np.sort(np.concatenate([coarse, glass.t_values, vi.t_values], axis=-1)), atol=1e-5)


def test_merge_leaves_distinct_samples_untouched():
    t = np.array([[2.0, 3.0, 5.0]])
    np.testing.assert_array_equal(merge_t_values(t, np.array([[4.0]])), [[2.0, 3.0, 4.0, 5.0]])


def test_camera_centre_ray_points_down_minus_z():
    camera = Camera.from_fov(5, 5, 0.6, np.eye(4))
    rays = generate_rays(camera, np.array([[2, 2]]), 1.0, 3.0)
    np.testing.assert_allclose(rays.directions[0], [0.0, 0.0, -1.0], atol=1e-12)


def test_image_rays_are_unit_and_row_major():
    c2w = np.eye(4)
    c2w[:3, 3] = [1.0, 2.0, 3.0]
    camera = Camera.from_fov(4, 3, 0.8, c2w)
    pixels = image_pixels(camera)
    assert pixels.shape == (12, 2)
    np.testing.assert_array_equal(pixels[:5], [[0, 0], [1, 0], [2, 0], [3, 0], [0, 1]])
    rays = generate_rays(camera, pixels, 1.0, 5.0)
    np.testing.assert_allclose(np.linalg.norm(rays.directions, axis=-1), 1.0)
    np.testing.assert_array_equal(rays.origins, np.tile([1.0, 2.0, 3.0], (12, 1)))


def test_pixels_outside_image_rejected():
    camera = Camera.from_fov(4, 4, 0.8, np.eye(4))
    with pytest.raises(InputError):
        generate_rays(camera, np.array([[4, 0]]), 1.0, 2.0)


def test_ray_batch_requires_near_before_far():
    with pytest.raises(InputError):
        make_rays(near=5.0, far=5.0)
