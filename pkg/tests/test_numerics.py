import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gsdetect.channel import gen_iid, snr_to_n0
from gsdetect.numerics import (
    HermitianSplit,
    NotPositiveDefiniteError,
    SingularTriangularError,
    cholesky_factor,
    cholesky_solve,
    hermitian_matvec,
    solve_lower,
    solve_upper,
)

from oracles import random_hpd


def test_cholesky_identity():
    np.testing.assert_array_equal(cholesky_factor(np.eye(4)), np.eye(4))


def test_cholesky_diagonal():
    np.testing.assert_allclose(cholesky_factor(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))


def test_cholesky_reconstructs_random_system(rng):
    w, _ = random_hpd(rng, 16, 4, 0.1)
    c = cholesky_factor(w)
    assert np.max(np.abs(c @ c.conj().T - w)) < 1e-10
    assert np.allclose(np.triu(c, 1), 0)
    # LAPACK factor is unique with positive diagonal
    np.testing.assert_allclose(c, np.linalg.cholesky(w), atol=1e-12)


def test_cholesky_accepts_split(rng):
    w, _ = random_hpd(rng, 12, 5, 0.3)
    np.testing.assert_allclose(cholesky_factor(HermitianSplit.from_dense(w)), cholesky_factor(w))


def test_cholesky_rejects_indefinite():
    with pytest.raises(NotPositiveDefiniteError):
        cholesky_factor(np.array([[1.0, 2.0], [2.0, 1.0]]))
    # rank deficient: pivot falls under the relative threshold
    v = np.array([1.0, 1j, 2.0])
    with pytest.raises(NotPositiveDefiniteError):
        cholesky_factor(np.outer(v, v.conj()))


def test_cholesky_never_fails_on_regularized_gram():
    # 10^4 i.i.d. channels with N0 > 0, as in the detector
    for seed in range(10_000):
        h = gen_iid(16, 4, seed)
        cholesky_factor(h.conj().T @ h + 1e-3 * np.eye(4))


def test_solve_lower_identity(rng):
    b = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    np.testing.assert_array_equal(solve_lower(np.eye(5), b), b)


def test_solve_lower_hand_2x2():
    np.testing.assert_allclose(solve_lower(np.array([[2.0, 0.0], [1.0, 1.0]]), [2.0, 2.0]), [1.0, 1.0])


def test_solve_lower_residual(rng):
    c = np.tril(rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8)))
    c[np.diag_indices(8)] += 4.0
    b = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    assert np.max(np.abs(c @ solve_lower(c, b) - b)) < 1e-12


def test_solve_lower_matrix_rhs(rng):
    c = np.tril(rng.standard_normal((6, 6))) + 3 * np.eye(6)
    b = rng.standard_normal((6, 3))
    np.testing.assert_allclose(solve_lower(c, b), np.linalg.solve(c, b), atol=1e-12)


def test_solve_lower_singular():
    with pytest.raises(SingularTriangularError, match="singular triangular"):
        solve_lower(np.array([[1.0, 0.0], [1.0, 0.0]]), [1.0, 1.0])


def test_solve_lower_shape_mismatch():
    with pytest.raises(ValueError):
        solve_lower(np.eye(3), np.ones(4))


def test_solve_upper_and_cholesky_solve(rng):
    w, _ = random_hpd(rng, 20, 6, 0.5)
    b = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    u = np.triu(w) + np.eye(6)
    np.testing.assert_allclose(solve_upper(u, b), np.linalg.solve(u, b), atol=1e-12)
    np.testing.assert_allclose(cholesky_solve(cholesky_factor(w), b), np.linalg.solve(w, b), atol=1e-12)


def test_hermitian_matvec_identity_and_diagonal(rng):
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    eye = HermitianSplit(np.ones(4), np.zeros((4, 4)))
    np.testing.assert_array_equal(hermitian_matvec(eye, v), v)
    d = np.array([1.0, 2.0, 3.0, 4.0])
    np.testing.assert_allclose(hermitian_matvec(HermitianSplit(d, np.zeros((4, 4))), v), d * v)


def test_hermitian_matvec_matches_dense(rng):
    w, _ = random_hpd(rng, 32, 8, 0.2)
    split = HermitianSplit.from_dense(w)
    v = rng.standard_normal((8, 3)) + 1j * rng.standard_normal((8, 3))
    assert np.max(np.abs(hermitian_matvec(split, v) - w @ v)) < 1e-12


def test_hermitian_matvec_dimension_mismatch():
    with pytest.raises(ValueError):
        hermitian_matvec(HermitianSplit(np.ones(3), np.zeros((3, 3))), np.ones(4))


def test_split_is_hermitian_and_immutable(rng):
    lower = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    split = HermitianSplit(np.arange(1.0, 6.0), lower)
    w = split.to_dense()
    np.testing.assert_array_equal(w, w.conj().T)
    # entries on and above the diagonal of `lower` are dropped
    np.testing.assert_array_equal(split.lower, np.tril(lower, -1))
    with pytest.raises(ValueError):
        split.d[0] = 7.0


def test_split_rejects_bad_input():
    with pytest.raises(ValueError):
        HermitianSplit(np.ones(3), np.zeros((4, 4)))
    with pytest.raises(ValueError):
        HermitianSplit(np.array([1.0, np.nan]), np.zeros((2, 2)))


def test_regularized_split_has_positive_diagonal():
    h = gen_iid(64, 8, 3)
    split = HermitianSplit.from_dense(h.conj().T @ h + snr_to_n0(8, 10) * np.eye(8))
    assert np.all(split.d > 0)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 10), seed=st.integers(0, 2**31))
def test_solve_lower_roundtrip_property(n, seed):
    rng = np.random.default_rng(seed)
    c = np.tril(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    c[np.diag_indices(n)] = 1.0 + rng.random(n)
    b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x = solve_lower(c, b)
    assert np.max(np.abs(c @ x - b)) < 1e-10 * max(1.0, np.max(np.abs(x)))


@settings(max_examples=60, deadline=None)
@given(n_t=st.integers(1, 8), extra=st.integers(0, 8), seed=st.integers(0, 2**31))
def test_cholesky_property(n_t, extra, seed):
    w, _ = random_hpd(np.random.default_rng(seed), n_t + extra, n_t, 0.05)
    c = cholesky_factor(w)
    assert np.all(np.real(np.diag(c)) > 0)
    assert np.max(np.abs(c @ c.conj().T - w)) < 1e-10 * np.max(np.abs(w))
