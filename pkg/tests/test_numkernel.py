import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covx.errors import ContractViolation, DimensionError
from covx.numkernel import (herm_to_real, hermitian_basis, hermitian_eig, hs_inner, is_hermitian, is_psd,
                            is_unitary, numerical_rank, op_to_vec, partial_trace, psd_factor, psd_rank,
                            rank_gap, real_nullspace, real_to_herm, singular_values, span_dimension, svd,
                            vec_to_op)
from covx.reps import SUdTensor

from oracles import loop_partial_trace, random_unitary

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)


def rand_c(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def rand_psd(rng, n, rank=None):
    A = rand_c(rng, n, rank or n)
    return A @ A.conj().T


class TestPartialTrace:
    def test_identity(self):
        assert np.allclose(partial_trace(np.eye(4), (2, 2), [1]), 2 * np.eye(2))

    def test_symmetric_projector_su2(self):
        P = SUdTensor(2, "ustar_ustar").projectors()["+"]
        assert np.allclose(partial_trace(P, (2, 2), [1]), 1.5 * np.eye(2), atol=1e-12)

    def test_against_loop_oracle(self):
        rng = np.random.default_rng(1)
        M = rand_psd(rng, 6)
        for traced in ([0], [1]):
            assert np.allclose(partial_trace(M, (2, 3), traced), loop_partial_trace(M, (2, 3), traced))

    def test_three_factors_against_oracle(self):
        rng = np.random.default_rng(2)
        M = rand_c(rng, 12, 12)
        for traced in ([0], [1], [2], [0, 2], [1, 2]):
            assert np.allclose(partial_trace(M, (2, 3, 2), traced), loop_partial_trace(M, (2, 3, 2), traced))

    def test_trace_everything(self):
        rng = np.random.default_rng(3)
        M = rand_c(rng, 6, 6)
        assert np.isclose(partial_trace(M, (2, 3), [0, 1])[0, 0], np.trace(M))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            partial_trace(np.eye(6), (2, 2), [0])
        with pytest.raises(DimensionError):
            partial_trace(np.ones((2, 3)), (2,), [0])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 10_000))
    def test_trace_preserving_and_linear(self, a, b, seed):
        rng = np.random.default_rng(seed)
        M, N = rand_c(rng, a * b, a * b), rand_c(rng, a * b, a * b)
        for t in ([0], [1]):
            assert np.isclose(np.trace(partial_trace(M, (a, b), t)), np.trace(M))
            lhs = partial_trace(2 * M - 1j * N, (a, b), t)
            rhs = 2 * partial_trace(M, (a, b), t) - 1j * partial_trace(N, (a, b), t)
            assert np.allclose(lhs, rhs)


class TestVectorization:
    def test_identity_is_max_entangled(self):
        assert np.allclose(op_to_vec(np.eye(2)), [1, 0, 0, 1])

    def test_round_trip(self):
        X = rand_c(np.random.default_rng(0), 3, 2)
        assert np.array_equal(vec_to_op(op_to_vec(X), (3, 2)), X)

    def test_is_kron_with_identity_on_max_entangled(self):
        rng = np.random.default_rng(4)
        X = rand_c(rng, 3, 3)
        I = np.eye(3).reshape(-1)
        assert np.allclose(op_to_vec(X), np.kron(X, np.eye(3)) @ I)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000))
    def test_isometry(self, seed):
        rng = np.random.default_rng(seed)
        X, Y = rand_c(rng, 2, 3), rand_c(rng, 2, 3)
        assert np.isclose(np.vdot(op_to_vec(X), op_to_vec(Y)), np.trace(X.conj().T @ Y))
        assert np.isclose(hs_inner(X, Y), np.trace(X.conj().T @ Y))

    def test_bad_dims(self):
        with pytest.raises(DimensionError):
            vec_to_op(np.ones(5), (2, 3))


class TestSpan:
    def test_pauli_basis(self):
        assert span_dimension([np.eye(2), SX, SY, SZ]) == 4

    def test_multiple(self):
        X = rand_c(np.random.default_rng(1), 3, 3)
        assert span_dimension([X, 2 * X]) == 1

    def test_empty(self):
        assert span_dimension([]) == 0

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            span_dimension([np.eye(2), np.eye(3)])

    def test_invariant_under_recombination(self):
        rng = np.random.default_rng(5)
        ops = [rand_c(rng, 3, 3) for _ in range(4)] + [np.zeros((3, 3))]
        ops[3] = ops[0] + 2 * ops[1]
        G = rand_c(rng, 5, 5)
        mixed = [sum(G[i, j] * ops[j] for j in range(5)) for i in range(5)]
        assert span_dimension(ops) == span_dimension(mixed) == 3

    def test_rank_gap_reports_sides(self):
        sv = np.array([1.0, 1e-3, 1e-14])
        assert numerical_rank(sv, 1e-9) == 2
        assert rank_gap(sv, 1e-9) == (1e-3, 1e-14)


class TestPredicates:
    def test_hermitian_psd_unitary(self):
        rng = np.random.default_rng(6)
        P = rand_psd(rng, 4)
        assert is_hermitian(P) and is_psd(P)
        assert not is_psd(-P)
        assert not is_hermitian(rand_c(rng, 3, 3))
        assert is_unitary(random_unitary(4, rng))
        assert not is_unitary(2 * np.eye(2))
        assert not is_hermitian(np.ones((2, 3)))


class TestFactorizations:
    def test_identity(self):
        X = psd_factor(np.eye(3))
        assert X.shape == (3, 3) and np.allclose(X.conj().T @ X, np.eye(3))

    def test_rank_one(self):
        e = np.ones(3)
        X = psd_factor(np.outer(e, e))
        assert X.shape == (1, 3)
        assert np.allclose(X.conj().T @ X, np.outer(e, e), atol=1e-14)

    def test_zero(self):
        assert psd_factor(np.zeros((3, 3))).shape == (0, 3)

    def test_rejects_non_psd_and_non_hermitian(self):
        with pytest.raises(ContractViolation):
            psd_factor(np.diag([1.0, -1.0]))
        with pytest.raises(ContractViolation):
            hermitian_eig(np.array([[0, 1], [0, 0]]))

    @pytest.mark.parametrize("n", [2, 5, 16, 33, 64])
    def test_reconstruction(self, n):
        rng = np.random.default_rng(n)
        for rank in (1, n // 2 or 1, n):
            M = rand_psd(rng, n, rank)
            X = psd_factor(M, 1e-9)
            assert X.shape[0] == rank == psd_rank(M)
            assert np.linalg.norm(X.conj().T @ X - M) <= 10 * 1e-9 * np.linalg.norm(M)

    def test_eig_and_svd(self):
        rng = np.random.default_rng(7)
        H = rand_psd(rng, 4) - 2 * np.eye(4)
        lam, V = hermitian_eig(H)
        assert np.all(np.diff(lam) >= 0)
        assert np.allclose(V @ np.diag(lam) @ V.conj().T, H)
        A = rand_c(rng, 3, 2)
        U, s, Vh = svd(A)
        assert np.allclose(U[:, :2] * s @ Vh, A)


class TestHermitianCoordinates:
    def test_basis_orthonormal(self):
        B = hermitian_basis(3)
        G = np.array([[np.vdot(a, b) for b in B] for a in B])
        assert np.allclose(G, np.eye(9))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 5), st.integers(0, 10_000))
    def test_round_trip(self, n, seed):
        rng = np.random.default_rng(seed)
        A = rand_c(rng, n, n)
        H = A + A.conj().T
        x = herm_to_real(H)
        assert np.allclose(real_to_herm(x, n), H)
        assert np.allclose(sum(c * E for c, E in zip(x, hermitian_basis(n))), H)
        assert np.isclose(x @ x, np.vdot(H, H).real)

    def test_nullspace(self):
        A = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        N, s = real_nullspace(A)
        assert N.shape == (3, 1) and np.allclose(A @ N, 0)
        assert singular_values([np.eye(2)]).shape == (1,)
