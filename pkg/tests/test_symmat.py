from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ramanadual.symmat import (NotPSDError, as_symmat, diag_concat, inner_product, numerical_rank,
                               pinv_psd, principal_submatrix, psd_check, range_contained,
                               scaled_eigenbasis, spectral)
from ramanadual.fixtures import example_4_1_displayed_certificates

from conftest import random_psd, random_sym

SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])


class TestAsSymmat:
    def test_averages_tiny_asymmetry(self):
        X = np.array([[1.0, 2.0], [2.0 + 1e-12, 3.0]])
        S = as_symmat(X)
        assert np.array_equal(S, S.T)
        assert S[0, 1] == pytest.approx(2.0)

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError, match="not symmetric"):
            as_symmat([[1.0, 2.0], [0.0, 1.0]])

    @pytest.mark.parametrize("bad", [np.zeros((0, 0)), np.zeros((2, 3)), [[np.nan]]])
    def test_rejects_malformed(self, bad):
        with pytest.raises(ValueError):
            as_symmat(bad)


class TestInnerProduct:
    def test_swap_with_itself(self):
        assert inner_product(SWAP, SWAP) == 2.0

    def test_identity_gives_trace(self, rng):
        Y = random_sym(rng, 4)
        assert inner_product(np.eye(4), Y) == pytest.approx(np.trace(Y))

    def test_orthogonal_slack_structure(self):
        assert inner_product(np.diag([1.0, 0.0]), SWAP) == 0.0

    def test_order_mismatch(self):
        with pytest.raises(ValueError):
            inner_product(np.eye(2), np.eye(3))


class TestPsdCheck:
    def test_nonnegative_diagonal(self):
        assert psd_check(np.diag([1.0, 0.0]))

    def test_indefinite_has_witness(self):
        x = 0.1
        X = np.array([[1.0, -x], [-x, 0.0]])
        chk = psd_check(X)
        assert not chk
        z = chk.witness
        assert z @ X @ z < 0

    def test_zero_is_psd(self):
        assert psd_check(np.zeros((3, 3)))

    def test_negative_tol_rejected(self):
        with pytest.raises(ValueError):
            psd_check(np.eye(2), -1.0)


class TestNumericalRank:
    def test_face_slack(self):
        assert numerical_rank(np.diag([1.0, 0.0])) == 1

    def test_identity(self):
        assert numerical_rank(np.eye(4)) == 4

    def test_threshold(self):
        assert numerical_rank(np.diag([1e-14, 1.0]), eps_rank=1e-9) == 1

    def test_not_psd(self):
        with pytest.raises(NotPSDError):
            numerical_rank(np.diag([1.0, -1.0]))


class TestPrincipalSubmatrix:
    def test_corner(self):
        assert np.array_equal(principal_submatrix([[1.0, 2.0], [2.0, 3.0]], 1, 1), [[1.0]])

    def test_identity_block(self):
        assert np.array_equal(principal_submatrix(np.eye(4), 2, 3), np.eye(2))

    def test_displayed_second_certificate(self):
        Y2 = example_4_1_displayed_certificates()[1]
        assert np.array_equal(principal_submatrix(Y2, 1, 3), np.diag([0.0, 0.0, 2.0]))

    @pytest.mark.parametrize("r,s", [(0, 1), (2, 1), (1, 3)])
    def test_out_of_range(self, r, s):
        with pytest.raises(IndexError):
            principal_submatrix(np.eye(2), r, s)


class TestDiagConcat:
    def test_identity_and_zero(self):
        assert np.array_equal(diag_concat(np.eye(1), np.zeros((1, 1))), np.diag([1.0, 0.0]))

    def test_zero_and_zero(self):
        assert np.array_equal(diag_concat(np.zeros((1, 1)), np.zeros((2, 2))), np.zeros((3, 3)))

    def test_associative(self):
        one = np.eye(1)
        left = diag_concat(diag_concat(one, one), one)
        right = diag_concat(one, diag_concat(one, one))
        assert np.array_equal(left, right)
        assert np.array_equal(left, np.eye(3))

    def test_rectangular(self):
        out = diag_concat(np.ones((1, 2)), np.ones((2, 1)))
        assert out.shape == (3, 3)
        assert out.sum() == 4.0


class TestSpectral:
    def test_diagonal_input(self):
        dec = spectral(np.diag([2.0, 1.0]))
        assert np.array_equal(dec.eigenvalues, [1.0, 2.0])
        assert np.array_equal(np.abs(dec.eigenvectors), [[0.0, 1.0], [1.0, 0.0]])

    def test_swap(self):
        dec = spectral(SWAP)
        assert np.allclose(dec.eigenvalues, [-1.0, 1.0], atol=1e-15)

    def test_zero(self):
        dec = spectral(np.zeros((3, 3)))
        assert np.array_equal(dec.eigenvalues, np.zeros(3))
        assert np.array_equal(dec.eigenvectors, np.eye(3))

    def test_matches_lapack(self, rng):
        X = random_sym(rng, 7)
        assert np.allclose(spectral(X).eigenvalues, np.linalg.eigvalsh(X), atol=1e-12)

    @pytest.mark.slow
    def test_reconstruction_random(self):
        rng = np.random.default_rng(1)
        for _ in range(10_000):
            n = int(rng.integers(1, 9))
            X = random_sym(rng, n) * 10.0 ** rng.uniform(-3, 3)
            dec = spectral(X)
            lam, Q = dec.eigenvalues, dec.eigenvectors
            tol = 1e-10 * (1.0 + np.max(np.abs(lam)))
            assert np.max(np.abs(dec.reconstruct() - X)) <= tol
            assert np.max(np.abs(Q.T @ Q - np.eye(n))) <= 1e-10


class TestRangeContained:
    def test_tangent_example(self):
        W = np.array([[0.0, 0.0], [1.0, 0.0]])
        assert range_contained(W, np.diag([0.0, 1.0]))

    def test_full_range(self, rng):
        assert range_contained(rng.standard_normal((3, 3)), np.eye(3))

    def test_zero_range(self):
        assert not range_contained(np.eye(2), np.zeros((2, 2)))

    def test_least_squares_oracle(self):
        rng = np.random.default_rng(7)
        disagreements = 0
        for _ in range(500):
            n = int(rng.integers(1, 7))
            U = random_psd(rng, n, int(rng.integers(0, n + 1)))
            if rng.random() < 0.5:
                # inside the range by construction
                W = U @ rng.standard_normal((n, n))
            else:
                W = rng.standard_normal((n, n))
            H, *_ = np.linalg.lstsq(U, W, rcond=1e-9)
            oracle = np.linalg.norm(U @ H - W, 2) <= 1e-8 * (1.0 + np.linalg.norm(W, 2))
            disagreements += range_contained(W, U) != oracle
        assert disagreements == 0


class TestEigenHelpers:
    def test_scaled_basis_gives_identity_block(self, rng):
        X = random_psd(rng, 5, 3)
        Q, k = scaled_eigenbasis(X, 1e-9)
        assert k == 3
        assert np.allclose(Q.T @ X @ Q, diag_concat(np.zeros((2, 2)), np.eye(3)), atol=1e-10)

    def test_pinv(self, rng):
        X = random_psd(rng, 4, 2)
        assert np.allclose(pinv_psd(X), np.linalg.pinv(X, rcond=1e-9), atol=1e-9)


@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_trace_congruence_invariance(n, seed):
    rng = np.random.default_rng(seed)
    X, Y = random_sym(rng, n), random_sym(rng, n)
    T = rng.standard_normal((n, n)) + 2.0 * np.eye(n)
    if np.linalg.cond(T) > 1e4:
        return
    Ti = np.linalg.inv(T)
    lhs = inner_product(T.T @ X @ T, Ti @ Y @ Ti.T)
    rhs = inner_product(X, Y)
    scale = np.linalg.norm(X) * np.linalg.norm(Y) * np.linalg.cond(T) ** 2
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs), 1e-6 * scale)


@given(st.lists(st.integers(1, 4), min_size=1, max_size=4), st.integers(0, 2**32 - 1))
def test_diag_concat_preserves_psd(orders, seed):
    rng = np.random.default_rng(seed)
    blocks = [random_psd(rng, k, int(rng.integers(0, k + 1))) for k in orders]
    assert psd_check(diag_concat(*blocks))
