# tests/test_volume.py
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.autodiff.tensor import Tensor
from src.renderer.sampling import FAR_SENTINEL
from src.renderer.volume import (
    accumulate_offsets,
    composite,
    refraction_weights,
    render_feature,
    render_view_independent,
    volume_weights,
)
from src.utils.errors import InputError, ShapeError


def brute_weights(sigma, deltas):
    weights = np.zeros_like(sigma)
    for r in range(sigma.shape[0]):
        transmittance = 1.0
        for i in range(sigma.shape[1]):
            weights[r, i] = transmittance * (1.0 - np.exp(-sigma[r, i] * deltas[r, i]))
            transmittance *= np.exp(-sigma[r, i] * deltas[r, i])
    return weights


def random_case(rng):
    rays = int(rng.integers(1, 4))
    n = int(rng.integers(1, 9))
    sigma = rng.exponential(2.0, size=(rays, n)) * (rng.random((rays, n)) > 0.2)
    deltas = rng.uniform(0.01, 1.0, size=(rays, n))
    if rng.random() < 0.5:
        deltas[:, -1] = FAR_SENTINEL
    return sigma, deltas


def test_volume_ops_match_brute_force_sums():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        sigma, deltas = random_case(rng)
        rays, n = sigma.shape
        colors = rng.random((rays, n, 3))
        offsets = rng.normal(size=(rays, n, 3))
        positions = rng.normal(size=(rays, n, 3))
        features = rng.normal(size=(rays, n, 5))
        expected_w = brute_weights(sigma, deltas)

        weights = refraction_weights(Tensor(sigma), Tensor(deltas))
        np.testing.assert_allclose(weights.data, expected_w, rtol=1e-6, atol=1e-12)

        rgb, _, w_vi = render_view_independent(Tensor(sigma), Tensor(colors), Tensor(deltas))
        expected_rgb = np.einsum("rn,rnc->rc", expected_w, colors)
        np.testing.assert_allclose(rgb.data, expected_rgb, rtol=1e-6, atol=1e-12)
        np.testing.assert_allclose(w_vi.data, expected_w, rtol=1e-6, atol=1e-12)

        shifted = accumulate_offsets(Tensor(positions), Tensor(expected_w), Tensor(offsets))
        expected_x = positions.copy()
        for r in range(rays):
            running = np.zeros(3)
            for i in range(n):
                running += expected_w[r, i] * offsets[r, i]
                expected_x[r, i] += running
        np.testing.assert_allclose(shifted.data, expected_x, rtol=1e-6, atol=1e-12)

        feature_map = render_feature(Tensor(sigma), Tensor(features), Tensor(deltas))
        np.testing.assert_allclose(
            feature_map.data, np.einsum("rn,rnf->rf", expected_w, features), rtol=1e-6, atol=1e-12
        )


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_weights_sum_to_at_most_one(seed):
    sigma, deltas = random_case(np.random.default_rng(seed))
    weights, transmittance = volume_weights(Tensor(sigma), Tensor(deltas))
    assert np.all(weights.data >= 0)
    assert np.all(weights.data.sum(axis=-1) <= 1.0 + 1e-12)
    assert np.all(np.diff(transmittance.data, axis=-1) <= 1e-15)


def test_zero_density_gives_background():
    sigma = np.zeros((2, 4))
    deltas = np.full((2, 4), 0.5)
    colors = np.full((2, 4, 3), 0.3)
    rgb, depth, weights = render_view_independent(
        Tensor(sigma), Tensor(colors), Tensor(deltas), Tensor(np.ones((2, 4))), white_background=True
    )
    np.testing.assert_array_equal(weights.data, 0.0)
    np.testing.assert_allclose(rgb.data, 1.0)
    np.testing.assert_array_equal(depth.data, 0.0)


def test_zero_glass_density_keeps_positions():
    positions = np.random.default_rng(0).normal(size=(3, 5, 3))
    weights = refraction_weights(Tensor(np.zeros((3, 5))), Tensor(np.full((3, 5), 0.2)))
    offsets = Tensor(np.ones((3, 5, 3)))
    np.testing.assert_array_equal(accumulate_offsets(Tensor(positions), weights, offsets).data, positions)


def test_opaque_first_sample_takes_all_weight():
    sigma = np.array([[1e6, 5.0, 5.0]])
    deltas = np.array([[1.0, 1.0, FAR_SENTINEL]])
    weights, _ = volume_weights(Tensor(sigma), Tensor(deltas))
    np.testing.assert_allclose(weights.data, [[1.0, 0.0, 0.0]], atol=1e-12)


def test_negative_density_rejected():
    with pytest.raises(InputError):
        refraction_weights(Tensor(np.array([[0.5, -0.1]])), Tensor(np.ones((1, 2))))


def test_length_mismatch_rejected():
    with pytest.raises(ShapeError):
        volume_weights(Tensor(np.ones((1, 3))), Tensor(np.ones((1, 4))))
    with pytest.raises(ShapeError):
        accumulate_offsets(Tensor(np.ones((1, 3, 3))), Tensor(np.ones((1, 2))), Tensor(np.ones((1, 3, 3))))


def test_composite_adds_gated_reflection():
    out = composite(Tensor(np.array([[0.2, 0.3, 0.4]])), Tensor(np.array([[1.0, 0.5, 0.0]])),
                    Tensor(np.array([[0.5]])))
    np.testing.assert_allclose(out.data, [[0.7, 0.55, 0.4]])
