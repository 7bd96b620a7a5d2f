# tests/test_autodiff.py
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.autodiff import functional as F
from src.autodiff.gradcheck import check_gradients
from src.autodiff.optimizer import Adam, ExponentialDecay, OptimizerState, optimizer_step
from src.autodiff.tensor import Tensor, no_grad
from src.utils.errors import MissingGradientError, ShapeError


def leaf(array):
    return Tensor(np.asarray(array, dtype=np.float64), requires_grad=True)


def test_broadcast_add_sums_gradient_over_broadcast_axes():
    a = leaf(np.ones((3, 1)))
    b = leaf(np.ones((1, 4)))
    (a + b).sum().backward()
    np.testing.assert_array_equal(a.grad, np.full((3, 1), 4.0))
    np.testing.assert_array_equal(b.grad, np.full((1, 4), 3.0))


def test_shared_leaf_accumulates_both_paths():
    x = leaf([2.0])
    (x * x + x).sum().backward()
    np.testing.assert_allclose(x.grad, [5.0])


def test_exclusive_cumsum_shifts_by_one():
    x = leaf([[1.0, 2.0, 3.0]])
    out = x.cumsum(axis=-1, exclusive=True)
    np.testing.assert_array_equal(out.data, [[0.0, 1.0, 3.0]])
    out.sum().backward()
    np.testing.assert_array_equal(x.grad, [[2.0, 1.0, 0.0]])


def test_backward_requires_scalar():
    x = leaf([1.0, 2.0])
    with pytest.raises(ShapeError):
        (x * 2.0).backward()


def test_incompatible_shapes_raise_shape_error():
    with pytest.raises(ShapeError):
        leaf(np.ones((2, 3))) + leaf(np.ones((4, 3)))
    with pytest.raises(ShapeError):
        leaf(np.ones((2, 3))) @ leaf(np.ones((2, 3)))


def test_no_grad_builds_no_tape():
    x = leaf([1.0, 2.0])
    with no_grad():
        y = (x * 3.0).exp()
    assert not y.requires_grad
    assert y.is_leaf


def test_softplus_is_stable_for_large_inputs():
    x = leaf([-800.0, 0.0, 800.0])
    y = x.softplus()
    assert np.all(np.isfinite(y.data))
    y.sum().backward()
    np.testing.assert_allclose(x.grad, [0.0, 0.5, 1.0], atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_composite_expression_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    w = leaf(rng.normal(size=(4, 3)))
    b = leaf(rng.normal(size=3))
    x = Tensor(rng.normal(size=(5, 4)))

    def loss():
        h = (x @ w + b).tanh()
        g = F.concatenate([h.sigmoid(), h.sin(), (h * h + 1.0).sqrt()], axis=-1)
        return (g.cumsum(axis=-1, exclusive=True) / 3.0).mean()

    assert check_gradients(loss, {"w": w, "b": b}, step=1e-6) == []


def test_adam_step_moves_against_gradient():
    p = leaf([1.0, -1.0])
    opt = Adam({"p": p})
    (p * p).sum().backward()
    opt.step(0.1)
    # 첫 스텝의 크기는 lr
    np.testing.assert_allclose(p.data, [0.9, -0.9], atol=1e-6)
    assert opt.state.step == 1


def test_functional_optimizer_step_carries_state():
    p = leaf([1.0, -1.0])
    state = OptimizerState()
    for _ in range(2):
        p.zero_grad()
        (p * p).sum().backward()
        optimizer_step({"p": p}, state, 0.1)
    assert state.step == 2
    assert state.first_moment["p"].shape == (2,)
    assert abs(p.data[0]) < 0.9


def test_adam_frozen_parameters_stay_put():
    p, q = leaf([1.0]), leaf([1.0])
    opt = Adam({"p": p, "q": q})
    (p * q).sum().backward()
    opt.step(0.1, frozen=["q"])
    assert q.data[0] == 1.0
    assert p.data[0] < 1.0


def test_adam_without_gradient_raises():
    opt = Adam({"p": leaf([1.0])})
    with pytest.raises(MissingGradientError):
        opt.step(0.1)


def test_adam_state_dict_round_trip_continues_identically():
    def run(resume_at=None):
        p = leaf([0.5, -2.0])
        opt = Adam({"p": p})
        for i in range(6):
            if i == resume_at:
                state = opt.state_dict()
                p = leaf(p.data.copy())
                opt = Adam({"p": p})
                opt.load_state_dict(state)
            opt.zero_grad()
            ((p * p) * p).sum().backward()
            opt.step(0.05)
        return p.data

    np.testing.assert_array_equal(run(), run(resume_at=3))


def test_exponential_decay_endpoints():
    schedule = ExponentialDecay(5e-4, 5e-5, 100)
    assert schedule(0) == pytest.approx(5e-4)
    assert schedule(100) == pytest.approx(5e-5)
    assert schedule(50) == pytest.approx(np.sqrt(5e-4 * 5e-5))
    assert schedule(1000) == pytest.approx(5e-5)
