import numpy as np
import pytest

from covx.errors import ContractViolation, DecompositionError, DimensionError, UnsupportedCombination
from covx.reps import (FiniteGroup, GroupElement, SUdTensor, U1Weights, conjugate, conjugate_by,
                       cyclic_regular, direct_sum, heisenberg_weyl, isotypic_decompose, quaternion_group,
                       swap_operator, symmetric_regular, tensor, trivial_group, with_spectator)

from oracles import binomial, clone_weights, qubit_weights, random_unitary, weight_mask_twirl


def clifford_group(d):
    """Closure of the Fourier and phase gates modulo global phase."""
    w = np.exp(2j * np.pi / d)
    F = np.array([[w ** (j * k) for k in range(d)] for j in range(d)]) / np.sqrt(d)
    P = np.diag([w ** (j * (j - 1) // 2) if d % 2 else np.exp(1j * np.pi * j * j / d) for j in range(d)])

    def canon(U):
        i = np.flatnonzero(np.abs(U.reshape(-1)) > 1e-9)[0]
        ph = U.reshape(-1)[i] / abs(U.reshape(-1)[i])
        return U / ph

    def key(U):
        return tuple(np.round(canon(U).reshape(-1), 6))

    found = {key(np.eye(d)): np.eye(d, dtype=complex)}
    frontier = [np.eye(d, dtype=complex)]
    while frontier:
        nxt = []
        for U in frontier:
            for G in (F, P):
                V = canon(G @ U)
                k = key(V)
                if k not in found:
                    found[k] = V
                    nxt.append(V)
        frontier = nxt
    return list(found.values())


def frame_potential(us):
    G = np.array([[abs(np.trace(a.conj().T @ b)) ** 4 for b in us] for a in us])
    return G.mean()


def reps_zoo():
    return {
        "u1": U1Weights([0, 1, 1, 2, -1]),
        "s3": symmetric_regular(3),
        "q8x3": with_spectator(quaternion_group(), 3),
        "hw3": heisenberg_weyl(3),
        "z4": cyclic_regular(4),
        "sud_uu": SUdTensor(3, "u_ustar"),
        "sud_ss": SUdTensor(3, "ustar_ustar"),
    }


class TestU1:
    def test_clone12_multiplicities(self):
        dec = isotypic_decompose(U1Weights(clone_weights(2)))
        assert [(b.label, b.irrep_dim, b.multiplicity) for b in dec] == [(-1, 1, 1), (0, 1, 3), (1, 1, 3), (2, 1, 1)]

    def test_clone13_multiplicities(self):
        dec = isotypic_decompose(U1Weights(clone_weights(3)))
        assert [b.multiplicity for b in dec] == [1, 4, 6, 4, 1]

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_n_qubits(self, n):
        single = U1Weights([0, 1])
        rep = single
        for _ in range(n - 1):
            rep = tensor(rep, single)
        assert list(rep.weights) == qubit_weights(n)
        dec = isotypic_decompose(rep)
        assert [b.multiplicity for b in dec] == [binomial(n, k) for k in range(n + 1)]
        assert dec.sum_sq_multiplicities() == binomial(2 * n, n)

    def test_twirl_matches_mask(self):
        rng = np.random.default_rng(0)
        rep = U1Weights([0, 2, 2, -1])
        Z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        assert np.allclose(rep.twirl(Z), weight_mask_twirl(Z, rep.weights))
        assert np.allclose(rep.group_average(Z), weight_mask_twirl(Z, rep.weights))

    def test_bad_weights(self):
        with pytest.raises(ValueError):
            U1Weights([0.5, 1])
        with pytest.raises(ValueError):
            U1Weights([])

    def test_group_element(self):
        assert np.isclose(GroupElement(angle=7.0).angle, 7.0 - 2 * np.pi)
        with pytest.raises(ValueError):
            GroupElement()
        with pytest.raises(ValueError):
            GroupElement(angle=1.0, index=1)
        with pytest.raises(ValueError):
            GroupElement(index=-1)


class TestFinite:
    def test_symmetric_regular(self):
        dec = isotypic_decompose(symmetric_regular(3))
        assert sorted((b.irrep_dim, b.multiplicity) for b in dec) == [(1, 1), (1, 1), (2, 2)]

    def test_irreducible_hw(self):
        for d in (2, 3, 5):
            dec = isotypic_decompose(heisenberg_weyl(d))
            assert [(b.irrep_dim, b.multiplicity) for b in dec] == [(d, 1)]

    def test_spectator(self):
        dec = isotypic_decompose(with_spectator(quaternion_group(), 3))
        assert [(b.irrep_dim, b.multiplicity) for b in dec] == [(2, 3)]

    def test_trivial(self):
        dec = isotypic_decompose(trivial_group(6))
        assert [(b.irrep_dim, b.multiplicity) for b in dec] == [(1, 6)]

    def test_product_of_cyclic(self):
        z4 = cyclic_regular(4)
        # elementwise Kronecker product is the diagonal subgroup; 4 distinct characters each 4 times
        dec = isotypic_decompose(tensor(z4, z4))
        assert sorted(b.multiplicity for b in dec) == [4, 4, 4, 4]

    def test_rejects_non_groups(self):
        with pytest.raises(ContractViolation):
            FiniteGroup([np.eye(2), np.diag([1, 1j])])
        with pytest.raises(ContractViolation):
            FiniteGroup([np.diag([1, -1])])
        with pytest.raises(ContractViolation):
            FiniteGroup([np.eye(2), 2 * np.eye(2)])
        with pytest.raises(DimensionError):
            FiniteGroup([])

    def test_unitary_index(self):
        g = quaternion_group()
        assert np.allclose(g.unitary(GroupElement(index=0)), np.eye(2))
        with pytest.raises(IndexError):
            g.unitary(99)

    def test_conjugate_by_keeps_structure(self):
        rng = np.random.default_rng(3)
        r = conjugate_by(symmetric_regular(3), random_unitary(6, rng))
        assert sorted((b.irrep_dim, b.multiplicity) for b in isotypic_decompose(r)) == [(1, 1), (1, 1), (2, 2)]

    def test_retry_budget(self):
        with pytest.raises(DecompositionError):
            isotypic_decompose(FiniteGroup(quaternion_group().unitaries), retries=0)


class TestSUd:
    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_blocks(self, d):
        uu = isotypic_decompose(SUdTensor(d, "u_ustar"))
        assert [(b.label, b.irrep_dim) for b in uu] == [(0, 1), (1, d * d - 1)]
        ss = isotypic_decompose(SUdTensor(d, "ustar_ustar"))
        assert [(b.label, b.irrep_dim) for b in ss] == [("+", d * (d + 1) // 2), ("-", d * (d - 1) // 2)]

    @pytest.mark.parametrize("d", [2, 3])
    def test_twirl_matches_clifford_two_design(self, d):
        cl = clifford_group(d)
        assert np.isclose(frame_potential(cl), 2.0)
        rng = np.random.default_rng(d)
        Z = rng.standard_normal((d * d, d * d)) + 1j * rng.standard_normal((d * d, d * d))
        for variant in ("u_ustar", "ustar_ustar"):
            rep = SUdTensor(d, variant)
            mats = [rep.unitary(u) for u in cl]
            oracle = sum(M.conj().T @ Z @ M for M in mats) / len(mats)
            assert np.allclose(rep.twirl(Z), oracle, atol=1e-10)

    def test_swap(self):
        E = swap_operator(3)
        a, b = np.arange(3.0), np.arange(3.0) ** 2
        assert np.allclose(E @ np.kron(a, b), np.kron(b, a))

    def test_bad_args(self):
        with pytest.raises(ValueError):
            SUdTensor(1)
        with pytest.raises(ValueError):
            SUdTensor(2, "nope")
        with pytest.raises(DimensionError):
            SUdTensor(2).unitary(np.eye(3))


class TestStructure:
    @pytest.mark.parametrize("name", list(reps_zoo()))
    def test_decomposition_residuals(self, name):
        rep = reps_zoo()[name]
        dec = isotypic_decompose(rep)
        res = dec.residuals()
        assert res["dimension"] == 0
        assert max(res.values()) < 1e-9
        assert np.allclose(sum(b.projector for b in dec), np.eye(rep.dim), atol=1e-9)

    @pytest.mark.parametrize("name", list(reps_zoo()))
    def test_twirl_idempotent_and_covariant(self, name):
        rep = reps_zoo()[name]
        rng = np.random.default_rng(11)
        Z = rng.standard_normal((rep.dim,) * 2) + 1j * rng.standard_normal((rep.dim,) * 2)
        T = rep.twirl(Z)
        assert np.linalg.norm(rep.twirl(T) - T) < 1e-9
        assert rep.commutator_residual(T) < 1e-9
        dec = isotypic_decompose(rep)
        assert np.linalg.norm(dec.commutant_twirl(T) - T) < 1e-9

    def test_combinators(self):
        a, b = U1Weights([0, 1]), U1Weights([2])
        assert tensor(a, b).weights == (2, 3)
        assert conjugate(a).weights == (0, -1)
        assert direct_sum(a, b).weights == (0, 1, 2)
        q = quaternion_group()
        assert direct_sum(q, q).dim == 4
        assert np.allclose(conjugate(q).unitaries, q.unitaries.conj())
        with pytest.raises(UnsupportedCombination):
            tensor(a, q)
        with pytest.raises(UnsupportedCombination):
            conjugate(SUdTensor(2))
        with pytest.raises(UnsupportedCombination):
            tensor(q, symmetric_regular(3))
        with pytest.raises(UnsupportedCombination):
            direct_sum(a, q)

    def test_block_lookup(self):
        dec = isotypic_decompose(U1Weights([0, 1, 1]))
        assert dec.block(1).multiplicity == 2
        assert dec.multiplicities() == {0: 1, 1: 2}
        assert dec.table() == [{"k": 0, "d": 1, "m": 1}, {"k": 1, "d": 1, "m": 2}]
        with pytest.raises(KeyError):
            dec.block(7)


def test_spectator_u1():
    assert with_spectator(U1Weights([0, 2]), 2).weights == (0, 0, 2, 2)
    with pytest.raises(UnsupportedCombination):
        with_spectator(SUdTensor(2), 2)
