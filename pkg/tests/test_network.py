import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from overparam.data import gen_gaussian_sphere, gen_orthogonal
from overparam.errors import DivergenceError, InputError
from overparam.gram import h_at_step
from overparam.network import (
    NetworkState, TrainConfig, count_at_risk, forward, gradient, init, loss, train,
)
from overparam.rng import make_rng
from overparam.theory import step_size


def test_init_deterministic():
    a, b = init(64, 5, seed=3), init(64, 5, seed=3)
    np.testing.assert_array_equal(a.W, b.W)
    np.testing.assert_array_equal(a.a, b.a)


def test_init_scale():
    for kappa in (1.0, 0.1):
        net = init(10_000, 10, kappa, seed=0)
        ratio = np.mean(np.sum(net.W**2, axis=1) / 10) / kappa**2
        assert abs(ratio - 1) < 0.05


def test_init_signs():
    net = init(64, 3, seed=0)
    assert set(np.unique(net.a)) == {-1.0, 1.0}
    assert abs(net.a.sum()) < 64


def test_state_invariants():
    net = init(8, 2, seed=0)
    with pytest.raises(ValueError):
        net.a[0] = 0.5
    with pytest.raises(ValueError):
        net.W0[0, 0] = 1.0
    with pytest.raises(InputError):
        NetworkState.from_weights(np.ones((2, 2)), [1.0, 0.5])
    with pytest.raises(InputError):
        init(4, 2, kappa=0.0)


def test_forward_examples():
    net = NetworkState.from_weights([[1.0, 0.0]], [1.0])
    assert forward(net, [[1.0, 0.0]])[0] == 1.0
    net = NetworkState.from_weights([[1.0, 0.0], [0.0, 1.0]], [1.0, -1.0])
    assert forward(net, [[1.0, 0.0]])[0] == pytest.approx(1 / math.sqrt(2), abs=1e-15)


def test_forward_dimension_mismatch():
    with pytest.raises(InputError):
        forward(init(4, 3, seed=0), np.eye(2))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), c=st.floats(0.01, 100))
def test_forward_positive_homogeneity(seed, c):
    ds = gen_gaussian_sphere(5, 4, seed=seed)
    net = init(20, 4, seed=seed, stream=1)
    scaled = NetworkState.from_weights(c * net.W, net.a)
    u = forward(net, ds)
    np.testing.assert_allclose(forward(scaled, ds), c * u, rtol=1e-12, atol=1e-14 * c)


def test_gradient_zero_residual():
    ds = gen_orthogonal(4, seed=0)
    net = init(16, 4, seed=0)
    u = forward(net, ds)
    np.testing.assert_array_equal(gradient(net, ds, u), np.zeros((16, 4)))


def test_reg_term_vanishes_at_init():
    ds = gen_orthogonal(4, seed=0)
    net = init(16, 4, seed=0)
    np.testing.assert_array_equal(gradient(net, ds, reg_beta=3.0), gradient(net, ds))
    assert loss(net, ds, reg_beta=3.0) == loss(net, ds)


def test_loss_examples():
    net = NetworkState.from_weights([[-1.0]], [1.0])
    assert loss(net, [[1.0]], [2.0]) == 2.0
    ds = gen_orthogonal(3, seed=0)
    net = init(8, 3, seed=0)
    assert loss(net, ds, forward(net, ds)) == 0.0


def _fd_configs(count):
    rng = make_rng(77, 0)
    out = []
    while len(out) < count:
        n = int(rng.integers(1, 6))
        d = int(rng.integers(2, 6))
        m = int(rng.integers(1, 12))
        X = rng.standard_normal((n, d))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        net = init(m, d, seed=int(rng.integers(1 << 30)))
        net.W += 0.3 * rng.standard_normal(net.W.shape)  # move away from W0 so reg is active
        if np.abs(X @ net.W.T).min() <= 1e-3:
            continue
        y = rng.standard_normal(n)
        beta = 0.0 if len(out) % 2 == 0 else float(rng.uniform(0.1, 5.0))
        out.append((net, X, y, beta))
    return out


def fd_relative_error(net, X, y, beta, h=1e-6):
    g = gradient(net, X, y, beta)
    fd = np.zeros_like(g)
    for idx in np.ndindex(*g.shape):
        orig = net.W[idx]
        net.W[idx] = orig + h
        lp = loss(net, X, y, beta)
        net.W[idx] = orig - h
        lm = loss(net, X, y, beta)
        net.W[idx] = orig
        fd[idx] = (lp - lm) / (2 * h)
    return np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-12)


def test_gradient_finite_differences():
    for net, X, y, beta in _fd_configs(30):
        assert fd_relative_error(net, X, y, beta) <= 1e-4


def test_eta_zero_keeps_loss():
    ds = gen_orthogonal(4, seed=1)
    tr = train(init(32, 4, seed=1), ds, cfg=TrainConfig(eta=0.0, steps=10))
    assert len(set(tr.loss_sq)) == 1


def test_zero_steps_single_record():
    ds = gen_orthogonal(4, seed=1)
    net = init(32, 4, seed=1)
    r = ds.y - forward(net, ds)
    tr = train(net, ds, cfg=TrainConfig(eta=0.1, steps=0))
    assert tr.k == [0] and tr.loss_sq == [float(r @ r)]


def test_orthogonal_loss_strictly_decreasing():
    ds = gen_orthogonal(8, seed=42)
    eta = step_size("quartic", {"lambda": 0.5}, 8)
    tr = train(init(2048, 8, seed=42, stream=1), ds, cfg=TrainConfig(eta=eta, steps=100))
    assert np.all(np.diff(tr.loss_sq) < 0)


def test_trace_identities():
    ds = gen_gaussian_sphere(6, 3, seed=5)
    tr = train(init(50, 3, seed=5, stream=1), ds, cfg=TrainConfig(eta=0.3, steps=40))
    z2m = np.array(tr.z_move) ** 2 * tr.m
    np.testing.assert_allclose(z2m, tr.flips, rtol=1e-12, atol=1e-12)
    assert tr.flips[-1] > 0
    assert np.all(np.array(tr.max_move) <= np.array(tr.frob_move) + 1e-15)


def test_record_stride_keeps_last_step():
    ds = gen_orthogonal(4, seed=1)
    tr = train(init(32, 4, seed=1), ds, cfg=TrainConfig(eta=0.01, steps=10, record_every=4))
    assert tr.k == [0, 4, 8, 10]


def test_no_flip_step_identity():
    rng = make_rng(11, 0)
    checked = 0
    for c in range(50):
        n, m, d = int(rng.integers(1, 9)), int(rng.integers(4, 65)), int(rng.integers(2, 6))
        ds = gen_gaussian_sphere(n, d, seed=c)
        net = init(m, d, seed=c, stream=1)
        eta = 0.05
        for _ in range(10):
            u = forward(net, ds)
            act = ds.X @ net.W.T >= 0
            H = h_at_step(ds.X, net.W).mat
            net.W -= eta * gradient(net, ds)
            if not np.array_equal(act, ds.X @ net.W.T >= 0):
                continue
            res = forward(net, ds) - u + eta * H @ (u - ds.y)
            assert np.linalg.norm(res) <= 1e-8 * (1 + np.linalg.norm(ds.y))
            checked += 1
    assert checked > 100


def test_recorded_step_residual_small_without_flips():
    ds = gen_orthogonal(4, seed=2)
    tr = train(init(512, 4, seed=2, stream=1), ds,
               cfg=TrainConfig(eta=1e-3, steps=5, record_residual=True))
    assert tr.step_residual[-1] is None
    assert max(tr.step_residual[:-1]) <= 1e-8 * (1 + np.linalg.norm(ds.y))


def test_divergence_reports_step():
    ds = gen_gaussian_sphere(8, 5, seed=1)
    with pytest.raises(DivergenceError) as ei:
        train(init(256, 5, seed=0, stream=1), ds, cfg=TrainConfig(eta=100.0, steps=50))
    assert ei.value.step == 4


def test_count_at_risk_limits():
    ds = gen_orthogonal(4, seed=0)
    net = init(100, 4, seed=0)
    np.testing.assert_array_equal(count_at_risk(net, ds, 0.0), 0)
    big = np.abs(ds.X @ net.W0.T).max() + 1
    np.testing.assert_array_equal(count_at_risk(net, ds, big), 100)


def test_count_at_risk_matches_anti_concentration_interval():
    R = 0.05
    ds = gen_orthogonal(2, seed=0)
    m = 4_000_000
    frac = count_at_risk(init(m, 2, seed=8), ds, R).mean() / m
    assert 2 * R / 3 < frac < 4 * R / 5


def test_config_validation():
    with pytest.raises(InputError):
        TrainConfig(eta=-1.0, steps=1)
    with pytest.raises(InputError):
        TrainConfig(eta=0.1, steps=-1)
    with pytest.raises(InputError):
        TrainConfig(eta=0.1, steps=1, reg_beta=-1)
