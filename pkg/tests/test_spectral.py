import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from overparam import spectral
from overparam.errors import InputError, SingularMatrixError

from conftest import rand_sym


def test_identity_values():
    np.testing.assert_array_equal(spectral.sym_eig(np.eye(2)).values, [1.0, 1.0])


def test_diagonal_values():
    np.testing.assert_allclose(spectral.sym_eig(np.diag([3.0, 2.0])).values, [2.0, 3.0])


def test_swap_matrix_eigensystem():
    vals, vecs = spectral.sym_eig([[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_allclose(vals, [-1.0, 1.0], atol=1e-15)
    s = 1 / np.sqrt(2)
    assert abs(abs(vecs[:, 0] @ np.array([s, -s])) - 1) < 1e-12
    assert abs(abs(vecs[:, 1] @ np.array([s, s])) - 1) < 1e-12


@pytest.mark.parametrize(
    "A, expected",
    [(np.zeros((3, 3)), 0.0), (np.diag([-4.0, 3.0]), 4.0), ([[0.0, 1.0], [1.0, 0.0]], 1.0)],
)
def test_spectral_norm_examples(A, expected):
    assert spectral.spectral_norm(A) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize(
    "A, expected",
    [(0.5 * np.eye(6), 0.5), (np.diag([0.1, 2.0]), 0.1), ([[1.0, 0.9], [0.9, 1.0]], 0.1)],
)
def test_min_eigenvalue_examples(A, expected):
    assert spectral.min_eigenvalue(A) == pytest.approx(expected, abs=1e-14)


def test_solve_examples():
    b = np.array([3.0, -1.0, 2.0])
    np.testing.assert_allclose(spectral.solve_spd(np.eye(3), b), b)
    np.testing.assert_allclose(spectral.solve_spd(0.5 * np.eye(4), np.ones(4)), 2 * np.ones(4))
    np.testing.assert_allclose(spectral.solve_spd(np.diag([2.0, 4.0]), [2.0, 4.0]), [1.0, 1.0])


def test_solve_rejects_singular():
    with pytest.raises(SingularMatrixError) as ei:
        spectral.solve_spd(np.diag([1.0, 0.0]), [1.0, 1.0])
    assert ei.value.min_eigenvalue == 0.0


def test_asymmetric_input_is_symmetrized():
    S = spectral.sym_matrix([[1.0, 2.0], [0.0, 1.0]])
    assert S[0, 1] == S[1, 0] == 1.0


@pytest.mark.parametrize("bad", [[[1.0, np.nan], [np.nan, 1.0]], [[1.0, 2.0, 3.0]], np.ones(3)])
def test_rejects_bad_input(bad):
    with pytest.raises(InputError):
        spectral.sym_matrix(bad)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 30), seed=st.integers(0, 2**32 - 1))
def test_eig_invariants(n, seed):
    A = rand_sym(np.random.default_rng(seed), n)
    vals, vecs = spectral.sym_eig(A)
    assert np.all(np.diff(vals) >= 0)
    assert np.abs(vecs.T @ vecs - np.eye(n)).max() <= 1e-10
    recon = (vecs * vals) @ vecs.T
    assert np.linalg.norm(recon - A) <= 1e-8 * max(1.0, np.linalg.norm(A))
    assert abs(spectral.spectral_norm(A) - np.abs(vals).max()) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 30), seed=st.integers(0, 2**32 - 1))
def test_solve_recovers_rhs(n, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n))
    A = B @ B.T + 0.1 * np.eye(n)
    b = rng.standard_normal(n)
    x = spectral.solve_spd(A, b)
    assert np.linalg.norm(A @ x - b) <= 1e-8 * max(1.0, np.linalg.norm(b))
