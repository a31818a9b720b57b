import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from overparam.data import gen_gaussian_sphere, gen_orthogonal
from overparam.errors import InputError
from overparam.gram import (
    GramKind, activations, estimate_constants, h_at_step, h_of_w, h_perp, hcts, hcts_matrix, hdis,
)
from overparam.rng import make_rng

E2 = np.eye(2)


def test_hcts_diagonal_and_orthogonal_entries():
    H = hcts(E2)
    assert H.kind is GramKind.CTS
    np.testing.assert_array_equal(H.mat, 0.5 * E2)


def test_hcts_at_cos_half_closed_form():
    X = np.array([[1.0, 0.0], [0.5, np.sqrt(0.75)]])
    assert hcts_matrix(X)[0, 1] == pytest.approx(1 / 6, abs=1e-15)


def test_hcts_matches_monte_carlo_oracle():
    # E_w[x.x' 1{w.x >= 0, w.x' >= 0}] from 10^7 Gaussian draws
    X = np.array([[1.0, 0.0], [0.5, np.sqrt(0.75)]])
    rng = make_rng(2024, 0)
    hits = 0
    total = 10**7
    for _ in range(10):
        W = rng.standard_normal((total // 10, 2))
        P = W @ X.T >= 0
        hits += int(np.count_nonzero(P[:, 0] & P[:, 1]))
    mc = 0.5 * hits / total
    assert abs(mc - 1 / 6) <= 3e-4


def test_hcts_clamps_round_off():
    x = np.array([1.0, 1e-9])
    x /= np.linalg.norm(x)
    X = np.vstack([x, x, -x])
    H = hcts_matrix(X)
    assert np.all(np.isfinite(H))
    assert H[0, 1] == pytest.approx(0.5)
    assert H[0, 2] == pytest.approx(0.0, abs=1e-15)


def test_h_of_w_examples():
    np.testing.assert_array_equal(h_of_w(E2, [1.0, 1.0]).mat, E2)
    np.testing.assert_array_equal(h_of_w(E2, [1.0, -1.0]).mat, [[1.0, 0.0], [0.0, 0.0]])
    X = gen_gaussian_sphere(5, 3, seed=0).X
    w = -X.sum(axis=0) * 0  # all-zero w counts as active on every sample
    assert h_of_w(X, w).mat[0, 0] == 1.0
    X_pos = np.abs(X)
    np.testing.assert_array_equal(h_of_w(X_pos, -np.ones(3)).mat, np.zeros((5, 5)))


def test_hdis_examples():
    W = np.array([[1.0, 1.0], [1.0, -1.0]])
    np.testing.assert_array_equal(hdis(E2, W).mat, [[1.0, 0.0], [0.0, 0.5]])
    X = gen_gaussian_sphere(4, 3, seed=1).X
    w = np.array([0.3, -0.2, 0.9])
    np.testing.assert_array_equal(hdis(X, w[None, :]).mat, h_of_w(X, w).mat)


def test_hdis_concentrates_on_orthogonal_data():
    ds = gen_orthogonal(8, seed=0)
    W = make_rng(5, 0).standard_normal((100_000, 8))
    assert np.abs(hdis(ds.X, W).mat - 0.5 * np.eye(8)).max() <= 0.01


def test_hdis_is_exact_average_of_single_draws():
    X = gen_gaussian_sphere(6, 4, seed=2).X
    W = make_rng(1, 0).standard_normal((37, 4))
    avg = sum(h_of_w(X, w).mat for w in W) / 37
    np.testing.assert_allclose(hdis(X, W).mat, avg, rtol=0, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 12), m=st.integers(1, 50))
def test_psd_and_symmetry(seed, n, m):
    X = gen_gaussian_sphere(n, 4, seed=seed).X
    W = make_rng(seed, 1).standard_normal((m, 4))
    for G in (hcts(X), hdis(X, W), h_of_w(X, W[0])):
        np.testing.assert_array_equal(G.mat, G.mat.T)
        assert G.min_eigenvalue() >= -1e-9
    np.testing.assert_allclose(np.diag(hcts_matrix(X)), 0.5, atol=1e-15)


def test_orthogonal_single_draws_are_zero_one_diagonal():
    X = gen_orthogonal(6, seed=4).X
    for w in make_rng(0, 0).standard_normal((20, 6)):
        H = h_of_w(X, w).mat
        off = H - np.diag(np.diag(H))
        assert np.abs(off).max() <= 1e-12
        assert np.all(np.isclose(np.diag(H), 0.0) | np.isclose(np.diag(H), 1.0))


def test_h_perp_trivial_cases():
    X = gen_gaussian_sphere(5, 3, seed=3).X
    W0 = make_rng(3, 1).standard_normal((40, 3))
    np.testing.assert_array_equal(h_perp(X, W0, W0, 0.0).mat, np.zeros((5, 5)))
    R = np.abs(W0 @ X.T).max() + 1e-3
    Wk = W0 + 0.01 * make_rng(3, 2).standard_normal(W0.shape)
    np.testing.assert_allclose(h_perp(X, Wk, W0, R).mat, h_at_step(X, Wk).mat, atol=1e-15)


def test_h_perp_hand_case():
    X = np.array([[1.0, 0.0], [0.6, 0.8]])
    W0 = np.array([[0.05, 1.0], [1.0, -1.0]])
    # only neuron 0 is at risk, and only on sample 0
    H = h_perp(X, W0, W0, 0.1)
    np.testing.assert_allclose(H.raw, [[0.5, 0.3], [0.0, 0.0]], atol=1e-15)
    np.testing.assert_allclose(H.mat, [[0.5, 0.15], [0.15, 0.0]], atol=1e-15)
    assert H.raw_frobenius == pytest.approx(np.sqrt(0.34))


def test_activations_boundary_counts_active():
    X = np.array([[1.0, 0.0]])
    assert activations(X, np.array([[0.0, 5.0]]))[0, 0]


@pytest.mark.parametrize("M", [1, 2, 17])
def test_orthogonal_constants_standard_basis(M):
    c = estimate_constants(np.eye(8), M, seed=M)
    assert c.lam == 0.5 and c.alpha == 0.5 and c.beta_var == 0.25
    assert c.theta == 0.0 and c.gamma == 0.0 and c.sample_count == M


def test_orthogonal_constants_rotated():
    c = estimate_constants(gen_orthogonal(8, seed=9).X, 50, seed=1)
    assert abs(c.lam - 0.5) <= 1e-12 and abs(c.theta) <= 1e-12
    assert abs(c.alpha - 0.5) <= 1e-14 and abs(c.beta_var - 0.25) <= 1e-14


def test_constants_ranges(sphere):
    c = estimate_constants(sphere.X, 300, seed=0)
    n = sphere.n
    assert 0 < c.lam <= 1
    assert 0 <= c.alpha <= n and 0 <= c.beta_var <= n * n
    assert 0 <= c.theta <= np.sqrt(n)
    assert set(c.alpha_quantiles) == {0.01, 0.05}
    assert c.alpha_quantiles[0.05] <= c.alpha_quantiles[0.01] <= c.alpha
    assert estimate_constants(sphere.X, 300, seed=0).to_dict() == c.to_dict()


def test_constants_reject_zero_samples(sphere):
    with pytest.raises(InputError):
        estimate_constants(sphere.X, 0)


def test_degenerate_data_warns():
    X = np.array([[1.0, 0.0], [1.0, 0.0]])
    with pytest.warns(UserWarning):
        c = estimate_constants(X, 5)
    assert c.lam <= 1e-12 and c.notes


def test_frobenius_decay_with_width():
    X = gen_gaussian_sphere(10, 20, seed=0).X
    Hc = hcts_matrix(X)

    def mean_dev(m):
        return np.mean([
            np.linalg.norm(hdis(X, make_rng(s, 7).standard_normal((m, 20))).mat - Hc)
            for s in range(20)
        ])

    devs = [mean_dev(m) for m in (1000, 4000, 16000, 64000)]
    ratios = np.array(devs[1:]) / np.array(devs[:-1])
    assert np.all((ratios >= 0.33) & (ratios <= 0.75)), ratios
