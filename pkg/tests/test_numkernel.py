import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimopred.exceptions import (
    ContractError,
    DimensionError,
    NearDefectiveWarning,
    SingularityError,
)
from mimopred.numkernel import (
    general_eig,
    hermitian_eig,
    khatri_rao,
    kron,
    ls_solve_regularized,
    unvec,
    vec,
)

from conftest import crandn


def kron_loops(a, b):
    # scalar complex products can differ from numpy's vectorized ones in the last ulp
    p, q = b.shape
    out = np.zeros((a.shape[0] * p, a.shape[1] * q), dtype=complex)
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            for k in range(p):
                for l in range(q):
                    out[i * p + k, j * q + l] = a[i, j] * b[k, l]
    return out


class TestKron:
    def test_identity(self):
        assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_hand_expansion(self):
        out = kron(np.array([[1], [1j]]), np.array([[1, -1]]))
        assert np.array_equal(out, np.array([[1, -1], [1j, -1j]]))

    def test_loop_oracle(self, rng):
        a = crandn(rng, 3, 2)
        b = crandn(rng, 2, 4)
        np.testing.assert_allclose(kron(a, b), kron_loops(a, b), rtol=1e-15, atol=0)

    def test_associativity(self, rng):
        a, b, c = crandn(rng, 2, 3), crandn(rng, 3, 1), crandn(rng, 2, 2)
        np.testing.assert_allclose(kron(kron(a, b), c), kron(a, kron(b, c)), rtol=0, atol=1e-14)

    def test_vec_identity(self, rng):
        a, x, b = crandn(rng, 3, 4), crandn(rng, 4, 2), crandn(rng, 5, 2)
        np.testing.assert_allclose(vec(a @ x @ b.T), kron(b, a) @ vec(x), atol=1e-10)

    def test_vec_outer_product(self, rng):
        a, b = crandn(rng, 3), crandn(rng, 2)
        np.testing.assert_allclose(vec(np.outer(a, b)), kron(b[:, None], a[:, None])[:, 0])

    def test_unvec_roundtrip(self, rng):
        x = crandn(rng, 3, 5)
        assert np.array_equal(unvec(vec(x), 3, 5), x)

    def test_rejects_non_finite(self):
        with pytest.raises(ContractError):
            kron(np.array([[np.nan]]), np.eye(2))


class TestKhatriRao:
    def test_scalar_columns(self):
        assert np.array_equal(khatri_rao(np.ones((1, 2)), np.ones((1, 2))), np.ones((1, 2)))

    def test_column_oracle(self, rng):
        a, b = crandn(rng, 2, 3), crandn(rng, 4, 3)
        out = khatri_rao(a, b)
        assert out.shape == (8, 3)
        for z in range(3):
            np.testing.assert_allclose(out[:, z], kron_loops(a[:, z:z + 1], b[:, z:z + 1])[:, 0],
                                       rtol=1e-15, atol=0)

    def test_neutral_factor(self, rng):
        a = crandn(rng, 3, 4)
        assert np.array_equal(khatri_rao(a, np.ones((1, 4))), a)

    def test_three_factors_associate(self, rng):
        a, b, c = crandn(rng, 2, 3), crandn(rng, 3, 3), crandn(rng, 2, 3)
        np.testing.assert_allclose(khatri_rao(a, b, c), khatri_rao(khatri_rao(a, b), c), atol=1e-15)

    def test_gram_is_hadamard(self, rng):
        a, b = crandn(rng, 4, 5), crandn(rng, 3, 5)
        kr = khatri_rao(a, b)
        np.testing.assert_allclose(kr.conj().T @ kr, (a.conj().T @ a) * (b.conj().T @ b),
                                   atol=1e-10)

    def test_column_mismatch(self):
        with pytest.raises(DimensionError):
            khatri_rao(np.ones((2, 3)), np.ones((2, 2)))


class TestHermitianEig:
    def test_diagonal(self):
        dec = hermitian_eig(np.diag([3.0, 1.0, 2.0]))
        np.testing.assert_allclose(dec.values, [3, 2, 1])
        np.testing.assert_allclose(np.abs(dec.vectors), np.eye(3)[:, [0, 2, 1]])

    def test_rank_one(self, rng):
        v = crandn(rng, 4)
        v *= np.sqrt(5) / np.linalg.norm(v)
        dec = hermitian_eig(np.outer(v, v.conj()))
        np.testing.assert_allclose(dec.values, [5, 0, 0, 0], atol=1e-12)

    def test_reconstruction(self, rng):
        x = crandn(rng, 8, 8)
        c = x + x.conj().T
        values, vectors = hermitian_eig(c)
        np.testing.assert_allclose(vectors @ np.diag(values) @ vectors.conj().T, c, atol=1e-9)
        np.testing.assert_allclose(vectors.conj().T @ vectors, np.eye(8), atol=1e-8)
        assert np.all(np.diff(values) <= 0)
        assert abs(values.sum() - np.trace(c).real) <= 1e-9 * np.abs(values).sum()

    def test_rejects_non_hermitian(self, rng):
        with pytest.raises(ContractError):
            hermitian_eig(crandn(rng, 3, 3))

    def test_rejects_non_square(self):
        with pytest.raises(ContractError):
            hermitian_eig(np.ones((2, 3)))


class TestGeneralEig:
    def test_diagonal(self):
        d = np.diag(np.exp(1j * np.array([0.3, -1.1])))
        dec = general_eig(d)
        np.testing.assert_allclose(np.sort_complex(dec.values), np.sort_complex(np.diag(d)))

    def test_similarity(self, rng):
        p = crandn(rng, 2, 2)
        m = p @ np.diag([2.0, 5.0]) @ np.linalg.inv(p)
        dec = general_eig(m)
        np.testing.assert_allclose(np.sort(dec.values.real), [2, 5], atol=1e-10)
        np.testing.assert_allclose(m @ dec.vectors, dec.vectors * dec.values,
                                   atol=1e-7 * np.linalg.norm(m))
        assert np.isfinite(dec.condition)

    def test_identity(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NearDefectiveWarning)
            dec = general_eig(np.eye(3))
        np.testing.assert_allclose(dec.values, 1)

    def test_defective_warns(self):
        with pytest.warns(NearDefectiveWarning):
            dec = general_eig(np.array([[1.0, 1.0], [0.0, 1.0]]))
        assert dec.condition > 1e10


class TestLeastSquares:
    def test_identity(self, rng):
        y = crandn(rng, 4)
        np.testing.assert_allclose(ls_solve_regularized(np.eye(4), y, 0.0), y)

    def test_scalar_mean(self):
        x = ls_solve_regularized(np.array([[1.0], [1.0]]), np.array([2.0, 4.0]), 0.0)
        np.testing.assert_allclose(x, [3.0])

    def test_regularized_recovery(self, rng):
        w = crandn(rng, 20, 4)
        x0 = crandn(rng, 4)
        x = ls_solve_regularized(w, w @ x0, 1e-5)
        assert np.linalg.norm(x - x0) <= 1e-4 * np.linalg.norm(x0)

    def test_normal_equations(self, rng):
        w, y = crandn(rng, 12, 5), crandn(rng, 12)
        sigma = 0.3
        x = ls_solve_regularized(w, y, sigma)
        lhs = (w.conj().T @ w + sigma * np.eye(5)) @ x
        np.testing.assert_allclose(lhs, w.conj().T @ y, rtol=1e-8, atol=1e-10)

    def test_matches_pinv(self, rng):
        w, y = crandn(rng, 10, 3), crandn(rng, 10)
        np.testing.assert_allclose(ls_solve_regularized(w, y, 0.0), np.linalg.pinv(w) @ y,
                                   atol=1e-8)

    def test_matrix_rhs(self, rng):
        w, y = crandn(rng, 10, 3), crandn(rng, 10, 2)
        x = ls_solve_regularized(w, y, 0.1)
        for j in range(2):
            np.testing.assert_allclose(x[:, j], ls_solve_regularized(w, y[:, j], 0.1), atol=1e-12)

    def test_singular(self):
        with pytest.raises(SingularityError):
            ls_solve_regularized(np.ones((3, 2)), np.ones(3), 0.0)

    def test_row_mismatch(self):
        with pytest.raises(DimensionError):
            ls_solve_regularized(np.ones((3, 2)), np.ones(4), 0.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.integers(1, 4),
       st.integers(0, 2**32 - 1))
def test_kron_shape_and_entries(p, q, r, s, seed):
    rng = np.random.default_rng(seed)
    a, b = crandn(rng, p, q), crandn(rng, r, s)
    out = kron(a, b)
    assert out.shape == (p * r, q * s)
    np.testing.assert_allclose(out, kron_loops(a, b), rtol=1e-15, atol=0)
