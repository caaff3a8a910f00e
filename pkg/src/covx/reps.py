"""Unitary group representations and their isotypic decomposition.

Three kinds are supported:

* :class:`U1Weights` -- ``U_phi = diag(exp(i w_j phi))`` for integer weights.
* :class:`FiniteGroup` -- an explicit list of unitaries closed under product.
* :class:`SUdTensor` -- the two analytic SU(d) tensor squares ``U (x) U*`` and
  ``U* (x) U*`` on ``C^d (x) C^d``.

The decomposition returns, for each class ``k`` of irreducibles, an isometry
``Y_k`` from ``H_k (x) C^{m_k}`` (irrep factor first) into the carrier with
``U_g Y_k = Y_k (pi_k(g) (x) I_{m_k})``. Every extremality test downstream is
written in these aligned coordinates.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import unitary_group

from .config import DEFAULT_SEED, DEFAULT_TOL
from .errors import ContractViolation, DecompositionError, DimensionError, UnsupportedCombination
from .numkernel import as_matrix, dagger, partial_trace

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class GroupElement:
    """A U(1) angle or an index into a finite group's element list."""

    angle: float | None = None
    index: int | None = None

    def __post_init__(self):
        if (self.angle is None) == (self.index is None):
            raise ValueError("GroupElement needs exactly one of angle / index")
        if self.angle is not None:
            object.__setattr__(self, "angle", float(self.angle) % TWO_PI)
        elif self.index < 0:
            raise ValueError(f"group index must be non-negative, got {self.index}")


class Representation:
    """Common interface; see the concrete subclasses."""

    dim: int

    def unitary(self, g) -> np.ndarray:
        raise NotImplementedError

    def samples(self) -> list[np.ndarray]:
        """Unitaries on which covariance residuals are evaluated."""
        raise NotImplementedError

    def twirl(self, Z) -> np.ndarray:
        """Exact projection of Z onto the commutant (Haar average of U^dag Z U)."""
        raise NotImplementedError

    def group_average(self, Z) -> np.ndarray:
        """Haar average of U_g^dag Z U_g by quadrature or group sum."""
        raise NotImplementedError

    def commutator_residual(self, Z) -> float:
        Z = as_matrix(Z)
        return max(float(np.linalg.norm(U @ Z - Z @ U)) for U in self.samples())

    def _check_operand(self, Z) -> np.ndarray:
        Z = as_matrix(Z)
        if Z.shape != (self.dim, self.dim):
            raise DimensionError(f"operator of shape {Z.shape} on a carrier of dimension {self.dim}")
        return Z


class U1Weights(Representation):
    """Diagonal U(1) representation with integer weights, one per basis vector."""

    def __init__(self, weights: Sequence[int]):
        w = np.asarray(weights)
        if w.ndim != 1 or w.size == 0 or not np.all(np.equal(np.mod(w, 1), 0)):
            raise ValueError("weights must be a non-empty list of integers")
        self.weights = tuple(int(x) for x in w)
        self.dim = len(self.weights)
        self._w = np.array(self.weights)

    def __repr__(self):
        return f"U1Weights({list(self.weights)})"

    def __eq__(self, other):
        return isinstance(other, U1Weights) and other.weights == self.weights

    def __hash__(self):
        return hash(("u1", self.weights))

    def unitary(self, g) -> np.ndarray:
        phi = g.angle if isinstance(g, GroupElement) else float(g)
        return np.diag(np.exp(1j * self._w * phi))

    def angles(self) -> np.ndarray:
        """4*max|w| + 1 equispaced angles: exact for every trigonometric
        polynomial that a product of two carrier matrix elements can produce."""
        n = 4 * int(np.max(np.abs(self._w))) + 1
        return TWO_PI * np.arange(n) / n

    def samples(self):
        return [self.unitary(phi) for phi in self.angles()]

    def twirl(self, Z):
        Z = self._check_operand(Z)
        return np.where(self._w[:, None] == self._w[None, :], Z, 0)

    def group_average(self, Z):
        Z = self._check_operand(Z)
        acc = np.zeros_like(Z)
        angles = self.angles()
        for phi in angles:
            ph = np.exp(1j * self._w * phi)
            acc += np.conj(ph)[:, None] * Z * ph[None, :]
        return acc / len(angles)


def _fingerprints(mats: np.ndarray, probe: np.ndarray) -> np.ndarray:
    return np.einsum("gij,ij->g", mats, probe)


class FiniteGroup(Representation):
    """A finite group given by its (unitary) matrices.

    With ``validate=True`` the constructor checks unitarity, presence of the
    identity, and closure under products and inverses up to ``tol``. Closure
    is tested on random linear fingerprints of the matrices, so the cost is
    quadratic in the group order but only quadratic in the dimension.
    """

    def __init__(self, unitaries, validate: bool = True, tol: float = 1e-8):
        mats = np.array([as_matrix(U) for U in unitaries])
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2] or mats.shape[0] == 0:
            raise DimensionError("finite group needs a non-empty list of equal square matrices")
        self.unitaries = mats
        self.order = mats.shape[0]
        self.dim = mats.shape[1]
        if validate:
            self._validate(tol)

    def __repr__(self):
        return f"FiniteGroup(order={self.order}, dim={self.dim})"

    def _validate(self, tol):
        n = self.dim
        eye = np.eye(n)
        gram = np.einsum("gki,gkj->gij", self.unitaries.conj(), self.unitaries)
        bad = np.max(np.linalg.norm(gram - eye, axis=(1, 2)))
        if bad > tol * n:
            raise ContractViolation(f"finite group element is not unitary (residual {bad:.2e})")
        if np.min(np.linalg.norm(self.unitaries - eye, axis=(1, 2))) > tol * n:
            raise ContractViolation("finite group list does not contain the identity")
        rng = np.random.default_rng(12345)
        probe = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        fp = _fingerprints(self.unitaries, probe)
        tree = cKDTree(np.column_stack([fp.real, fp.imag]))
        scale = tol * n * max(1.0, float(np.max(np.abs(probe))))
        left = np.einsum("ail,ij->alj", self.unitaries, probe)
        prod = np.einsum("alj,blj->ab", left, self.unitaries).reshape(-1)
        dist, _ = tree.query(np.column_stack([prod.real, prod.imag]))
        if np.max(dist) > scale:
            raise ContractViolation("finite group list is not closed under products")
        inv = _fingerprints(np.conj(np.transpose(self.unitaries, (0, 2, 1))), probe)
        dist, _ = tree.query(np.column_stack([inv.real, inv.imag]))
        if np.max(dist) > scale:
            raise ContractViolation("finite group list is not closed under inverses")

    def unitary(self, g) -> np.ndarray:
        i = g.index if isinstance(g, GroupElement) else int(g)
        if not 0 <= i < self.order:
            raise IndexError(f"group index {i} out of range for order {self.order}")
        return self.unitaries[i].copy()

    def samples(self):
        return list(self.unitaries)

    def twirl(self, Z):
        Z = self._check_operand(Z)
        G = self.unitaries
        return np.einsum("gki,kl,glj->ij", G.conj(), Z, G, optimize=True) / self.order

    group_average = twirl

    def character(self, Q) -> np.ndarray:
        """Character of the subrepresentation on the range of the isometry Q."""
        return np.einsum("ai,gab,bi->g", Q.conj(), self.unitaries, Q, optimize=True)


class SUdTensor(Representation):
    """SU(d) acting on C^d (x) C^d as U (x) U* (``u_ustar``) or U* (x) U* (``ustar_ustar``).

    Twirls use the analytic two-projector formula; covariance residuals are
    checked on a fixed set of seeded Haar-random unitaries.
    """

    n_samples = 6

    def __init__(self, d: int, variant: str = "u_ustar"):
        if int(d) < 2:
            raise ValueError("SU(d) tensor representation needs d >= 2")
        if variant not in ("u_ustar", "ustar_ustar"):
            raise ValueError(f"unknown SU(d) variant {variant!r}")
        self.d = int(d)
        self.variant = variant
        self.dim = self.d ** 2

    def __repr__(self):
        return f"SUdTensor(d={self.d}, variant={self.variant!r})"

    def unitary(self, g) -> np.ndarray:
        u = as_matrix(g)
        if u.shape != (self.d, self.d):
            raise DimensionError(f"SU({self.d}) element must be {self.d}x{self.d}")
        if self.variant == "u_ustar":
            return np.kron(u, u.conj())
        return np.kron(u.conj(), u.conj())

    def samples(self):
        us = unitary_group.rvs(self.d, size=self.n_samples, random_state=DEFAULT_SEED)
        return [self.unitary(u) for u in us]

    def projectors(self) -> dict:
        d = self.d
        if self.variant == "u_ustar":
            v = np.eye(d).reshape(-1) / np.sqrt(d)
            P0 = np.outer(v, v).astype(complex)
            return {0: P0, 1: np.eye(d * d) - P0}
        E = swap_operator(d)
        return {"+": 0.5 * (np.eye(d * d) + E), "-": 0.5 * (np.eye(d * d) - E)}

    def twirl(self, Z):
        Z = self._check_operand(Z)
        out = np.zeros_like(Z)
        for P in self.projectors().values():
            out += np.trace(P @ Z) / np.trace(P).real * P
        return out

    group_average = twirl


def swap_operator(d: int) -> np.ndarray:
    """E|a>|b> = |b>|a> on C^d (x) C^d."""
    E = np.zeros((d * d, d * d))
    for a in range(d):
        for b in range(d):
            E[b * d + a, a * d + b] = 1
    return E.astype(complex)


# ---------------------------------------------------------------- combinators


def tensor(r1: Representation, r2: Representation) -> Representation:
    """Kronecker product representation g -> U1_g (x) U2_g."""
    if isinstance(r1, U1Weights) and isinstance(r2, U1Weights):
        return U1Weights([a + b for a in r1.weights for b in r2.weights])
    if isinstance(r1, FiniteGroup) and isinstance(r2, FiniteGroup):
        if r1.order != r2.order:
            raise UnsupportedCombination("finite groups of different order cannot be tensored")
        mats = np.einsum("gij,gkl->gikjl", r1.unitaries, r2.unitaries)
        return FiniteGroup(mats.reshape(r1.order, r1.dim * r2.dim, r1.dim * r2.dim))
    raise UnsupportedCombination(f"cannot tensor {type(r1).__name__} with {type(r2).__name__}")


def conjugate(r: Representation) -> Representation:
    if isinstance(r, U1Weights):
        return U1Weights([-w for w in r.weights])
    if isinstance(r, FiniteGroup):
        return FiniteGroup(r.unitaries.conj(), validate=False)
    raise UnsupportedCombination(f"conjugate of {type(r).__name__} is not a supported kind")


def direct_sum(r1: Representation, r2: Representation) -> Representation:
    if isinstance(r1, U1Weights) and isinstance(r2, U1Weights):
        return U1Weights(r1.weights + r2.weights)
    if isinstance(r1, FiniteGroup) and isinstance(r2, FiniteGroup):
        if r1.order != r2.order:
            raise UnsupportedCombination("finite groups of different order cannot be summed")
        n1, n2 = r1.dim, r2.dim
        mats = np.zeros((r1.order, n1 + n2, n1 + n2), dtype=complex)
        mats[:, :n1, :n1] = r1.unitaries
        mats[:, n1:, n1:] = r2.unitaries
        return FiniteGroup(mats, validate=False)
    raise UnsupportedCombination(f"cannot sum {type(r1).__name__} with {type(r2).__name__}")


def conjugate_by(r: FiniteGroup, W) -> FiniteGroup:
    """The equivalent representation g -> W^dag U_g W."""
    W = as_matrix(W)
    return FiniteGroup(np.einsum("ki,gkl,lj->gij", W.conj(), r.unitaries, W), validate=False)


# ------------------------------------------------------------ group factories


def trivial_group(n: int) -> FiniteGroup:
    return FiniteGroup([np.eye(n)], validate=False)


def cyclic_regular(n: int) -> FiniteGroup:
    shift = np.roll(np.eye(n), 1, axis=0)
    return FiniteGroup([np.linalg.matrix_power(shift, k) for k in range(n)])


def symmetric_regular(n: int) -> FiniteGroup:
    """Left-regular representation of the symmetric group S_n."""
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    mats = []
    for g in perms:
        M = np.zeros((len(perms), len(perms)))
        for h in perms:
            gh = tuple(g[h[i]] for i in range(n))
            M[index[gh], index[h]] = 1
        mats.append(M)
    return FiniteGroup(mats)


def quaternion_group() -> FiniteGroup:
    """Q8 acting irreducibly on C^2 as {+-I, +-i sigma_x, +-i sigma_y, +-i sigma_z}."""
    sx = np.array([[0, 1], [1, 0]])
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.diag([1, -1])
    mats = []
    for M in (np.eye(2), 1j * sx, 1j * sy, 1j * sz):
        mats += [M, -M]
    return FiniteGroup(mats)


def heisenberg_weyl(d: int) -> FiniteGroup:
    """The order-d^3 Weyl-Heisenberg group {w^a X^b Z^c}, irreducible on C^d."""
    w = np.exp(TWO_PI * 1j / d)
    X = np.roll(np.eye(d), 1, axis=0)
    Z = np.diag(w ** np.arange(d))
    Xp = [np.linalg.matrix_power(X, b) for b in range(d)]
    Zp = [np.linalg.matrix_power(Z, c) for c in range(d)]
    mats = [w ** a * Xp[b] @ Zp[c] for a in range(d) for b in range(d) for c in range(d)]
    return FiniteGroup(mats, validate=d <= 8)


def with_spectator(r, m: int):
    """g -> U_g (x) I_m: one irreducible class of multiplicity m when U is irreducible."""
    if isinstance(r, U1Weights):
        return U1Weights([w for w in r.weights for _ in range(m)])
    if not isinstance(r, FiniteGroup):
        raise UnsupportedCombination(f"no spectator construction for {type(r).__name__}")
    return FiniteGroup(np.einsum("gij,kl->gikjl", r.unitaries, np.eye(m)).reshape(
        r.order, r.dim * m, r.dim * m), validate=False)


# -------------------------------------------------------------- decomposition


@dataclass(frozen=True)
class Block:
    label: object
    irrep_dim: int
    multiplicity: int
    isometry: np.ndarray = field(repr=False)

    @property
    def projector(self) -> np.ndarray:
        return self.isometry @ dagger(self.isometry)


@dataclass(frozen=True)
class IsotypicDecomposition:
    """Wedderburn data: carrier = (+)_k H_k (x) C^{m_k}."""

    blocks: tuple
    carrier_dim: int
    rep: Representation = field(repr=False, compare=False)

    def __iter__(self):
        return iter(self.blocks)

    def __len__(self):
        return len(self.blocks)

    @property
    def labels(self):
        return [b.label for b in self.blocks]

    def block(self, label) -> Block:
        for b in self.blocks:
            if b.label == label:
                return b
        raise KeyError(label)

    def multiplicities(self) -> dict:
        return {b.label: b.multiplicity for b in self.blocks}

    def sum_sq_multiplicities(self) -> int:
        return sum(b.multiplicity ** 2 for b in self.blocks)

    def compress(self, Z, blk: Block) -> np.ndarray:
        Y = blk.isometry
        return dagger(Y) @ Z @ Y

    def block_partial_trace(self, Z, blk: Block) -> np.ndarray:
        """Tr_{H_k}(Y_k^dag Z Y_k), an m_k x m_k matrix."""
        return partial_trace(self.compress(Z, blk), (blk.irrep_dim, blk.multiplicity), [0])

    def embed(self, blk: Block, C) -> np.ndarray:
        """Y_k (I_{d_k} (x) C) Y_k^dag."""
        Y = blk.isometry
        return Y @ np.kron(np.eye(blk.irrep_dim), C) @ dagger(Y)

    def irrep(self, blk: Block, U) -> np.ndarray:
        """pi_k(g) recovered from U_g."""
        C = self.compress(U, blk)
        return partial_trace(C, (blk.irrep_dim, blk.multiplicity), [1]) / blk.multiplicity

    def commutant_twirl(self, Z) -> np.ndarray:
        """sum_k Y_k (I (x) Tr_{H_k}(Y_k^dag Z Y_k) / d_k) Y_k^dag."""
        Z = as_matrix(Z)
        out = np.zeros((self.carrier_dim, self.carrier_dim), dtype=complex)
        for b in self.blocks:
            out += self.embed(b, self.block_partial_trace(Z, b) / b.irrep_dim)
        return out

    def residuals(self) -> dict:
        n = self.carrier_dim
        total = sum(b.projector for b in self.blocks)
        iso = max(float(np.linalg.norm(dagger(b.isometry) @ b.isometry - np.eye(b.isometry.shape[1])))
                  for b in self.blocks)
        align = 0.0
        for U in self.rep.samples():
            for b in self.blocks:
                pi = self.irrep(b, U)
                lhs = U @ b.isometry
                rhs = b.isometry @ np.kron(pi, np.eye(b.multiplicity))
                align = max(align, float(np.linalg.norm(lhs - rhs)))
        return {
            "dimension": abs(sum(b.irrep_dim * b.multiplicity for b in self.blocks) - n),
            "resolution": float(np.linalg.norm(total - np.eye(n))),
            "isometry": iso,
            "alignment": align,
        }

    def table(self) -> list[dict]:
        return [{"k": _label_json(b.label), "d": b.irrep_dim, "m": b.multiplicity} for b in self.blocks]


def _label_json(label):
    return label if isinstance(label, (int, str)) else str(label)


def _decompose_u1(rep: U1Weights) -> list[Block]:
    blocks = []
    eye = np.eye(rep.dim, dtype=complex)
    for k in sorted(set(rep.weights)):
        idx = [i for i, w in enumerate(rep.weights) if w == k]
        blocks.append(Block(k, 1, len(idx), eye[:, idx]))
    return blocks


def _decompose_sud(rep: SUdTensor) -> list[Block]:
    blocks = []
    for label, P in rep.projectors().items():
        lam, V = np.linalg.eigh(P)
        Y = V[:, lam > 0.5]
        blocks.append(Block(label, Y.shape[1], 1, Y))
    return blocks


def _cluster(lam: np.ndarray, gap: float) -> list[list[int]]:
    groups = [[0]]
    for i in range(1, lam.size):
        if lam[i] - lam[i - 1] > gap:
            groups.append([i])
        else:
            groups[-1].append(i)
    return groups


def _random_hermitian(rng, n):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (A + dagger(A)) / 2


def _decompose_finite(rep: FiniteGroup, rng, tol: float) -> list[Block]:
    n = rep.dim
    H = _random_hermitian(rng, n)
    T = rep.twirl(H)
    lam, V = np.linalg.eigh((T + dagger(T)) / 2)
    pieces = [V[:, g] for g in _cluster(lam, 1e-6 * float(np.linalg.norm(H, 2)))]
    for Q in pieces:
        chi = rep.character(Q)
        norm = float(np.mean(np.abs(chi) ** 2))
        if abs(norm - 1) > 1e-6:
            raise DecompositionError("eigenspace of a twirled operator is not irreducible",
                                     {"character_norm": norm})
    C = rep.twirl(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    cthr = 1e-7 * max(1.0, float(np.linalg.norm(C)))
    classes: list[list[np.ndarray]] = []
    for Q in pieces:
        for members in classes:
            ref = members[0]
            if ref.shape[1] == Q.shape[1] and np.linalg.norm(dagger(Q) @ C @ ref) > cthr:
                members.append(Q)
                break
        else:
            classes.append([Q])
    blocks = []
    for label, members in enumerate(classes):
        ref = members[0]
        dk, mk = ref.shape[1], len(members)
        Y = np.zeros((n, dk * mk), dtype=complex)
        for j, Q in enumerate(members):
            J = dagger(Q) @ C @ ref
            u = J / math.sqrt(float(np.real(np.trace(dagger(J) @ J))) / dk)
            Y[:, j::mk] = Q @ u
        blocks.append(Block(label, dk, mk, Y))
    return blocks


_CACHE: dict = {}


def isotypic_decompose(rep: Representation, tol: float = DEFAULT_TOL, seed: int = DEFAULT_SEED,
                       retries: int = 5) -> IsotypicDecomposition:
    """Wedderburn decomposition of ``rep`` with aligned multiplicity bases.

    Finite groups are split numerically: a seeded random Hermitian operator
    is twirled into the commutant and diagonalized (its eigenspaces are
    minimal invariant subspaces), then subspaces are grouped by whether a
    twirled random map intertwines them. The result is validated and the
    procedure retried with fresh randomness if any residual is too large.
    """
    key = (id(rep), tol, seed)
    hit = _CACHE.get(key)
    if hit is not None and hit.rep is rep:
        return hit
    limit = max(1e-8, 1e3 * tol) * max(1, rep.dim)
    last: dict = {}
    rng = np.random.default_rng(seed)
    attempts = retries if isinstance(rep, FiniteGroup) else 1
    for _ in range(attempts):
        try:
            if isinstance(rep, U1Weights):
                blocks = _decompose_u1(rep)
            elif isinstance(rep, SUdTensor):
                blocks = _decompose_sud(rep)
            elif isinstance(rep, FiniteGroup):
                blocks = _decompose_finite(rep, rng, tol)
            else:
                raise TypeError(f"unsupported representation {type(rep).__name__}")
        except DecompositionError as exc:
            last = exc.residuals
            continue
        dec = IsotypicDecomposition(tuple(blocks), rep.dim, rep)
        last = dec.residuals()
        if max(last.values()) <= limit:
            if len(_CACHE) > 256:
                _CACHE.clear()
            _CACHE[key] = dec
            return dec
    raise DecompositionError(f"isotypic decomposition failed after {attempts} attempts", last)
