"""Covariant POVMs with probability space equal to the group.

A covariant POVM has density ``dP_g = U_g^dag Xi U_g dg`` (Haar measure of
total mass one). Normalization is equivalent to the per-class constraints

    Tr_{H_k}(Y_k^dag Xi Y_k) = d_k I_{m_k}

so the admissible seeds Xi form a spectrahedron. This module tests
membership, evaluates densities, and decides extremality with an explicit
perturbation witness when the seed is not extremal.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_FEAS_TOL, DEFAULT_TOL
from .engine import ExtremalityReport, kernel_direction, max_step, span_stats
from .errors import ContractViolation, DimensionError
from .numkernel import (as_matrix, dagger, herm_to_real, hermitian_basis, is_psd, psd_factor,
                        psd_rank, vec_to_op)
from .reps import IsotypicDecomposition


@dataclass(frozen=True)
class PovmSeed:
    xi: np.ndarray
    dec: IsotypicDecomposition

    def __post_init__(self):
        xi = as_matrix(self.xi)
        if xi.shape != (self.dec.carrier_dim,) * 2:
            raise DimensionError(f"seed of shape {xi.shape} on a carrier of dimension {self.dec.carrier_dim}")
        object.__setattr__(self, "xi", xi)

    @property
    def rep(self):
        return self.dec.rep


@dataclass
class Feasibility:
    feasible: bool
    psd: bool
    min_eigenvalue: float
    residuals: dict

    def to_json(self) -> dict:
        return {
            "verdict": bool(self.feasible),
            "psd": bool(self.psd),
            "min_eigenvalue": self.min_eigenvalue,
            "residuals": {str(k): v for k, v in self.residuals.items()},
        }


def block_constraints(xi, dec: IsotypicDecomposition) -> dict:
    """Tr_{H_k}(Y_k^dag Xi Y_k) for every class k."""
    return {b.label: dec.block_partial_trace(xi, b) for b in dec}


def check_seed(xi, dec: IsotypicDecomposition, tol: float = DEFAULT_FEAS_TOL) -> Feasibility:
    xi = as_matrix(xi)
    if xi.shape != (dec.carrier_dim,) * 2:
        raise DimensionError(f"seed of shape {xi.shape} on a carrier of dimension {dec.carrier_dim}")
    herm = 0.5 * (xi + dagger(xi))
    lam_min = float(np.linalg.eigvalsh(herm)[0])
    psd = is_psd(xi, tol)
    residuals = {}
    for b in dec:
        T = dec.block_partial_trace(xi, b)
        residuals[b.label] = float(np.linalg.norm(T - b.irrep_dim * np.eye(b.multiplicity), 2))
    ok = psd and all(r <= tol * max(1, b.irrep_dim) for r, b in zip(residuals.values(), dec))
    return Feasibility(ok, psd, lam_min, residuals)


def density_at(seed: PovmSeed, g) -> np.ndarray:
    U = seed.rep.unitary(g)
    return dagger(U) @ seed.xi @ U


def _check_state(rho, n, tol):
    rho = as_matrix(rho)
    if rho.shape != (n, n):
        raise DimensionError(f"state of shape {rho.shape} on a carrier of dimension {n}")
    if not is_psd(rho, tol) or abs(np.trace(rho) - 1) > tol * n:
        raise ContractViolation("rho must be a density matrix (PSD with unit trace)")
    return rho


def probability_density(seed: PovmSeed, rho, g, tol: float = DEFAULT_FEAS_TOL) -> float:
    """Born-rule density Tr[U_g^dag Xi U_g rho] with respect to normalized Haar measure."""
    rho = _check_state(rho, seed.dec.carrier_dim, tol)
    return float(np.real(np.trace(density_at(seed, g) @ rho)))


def normalization(seed: PovmSeed) -> np.ndarray:
    """Group average of the density; equals the identity for a valid seed."""
    return seed.rep.group_average(seed.xi)


def necessary_rank_bound(seed: PovmSeed, tol: float = DEFAULT_TOL) -> bool:
    return psd_rank(seed.xi, tol) ** 2 <= seed.dec.sum_sq_multiplicities()


def _constraint_columns(X, dec):
    """Real matrix of B -> (Tr_{H_k}(Y_k^dag X^dag B X Y_k))_k over Hermitian B."""
    cols = []
    for E in hermitian_basis(X.shape[0]):
        Theta = dagger(X) @ E @ X
        cols.append(np.concatenate([herm_to_real(dec.block_partial_trace(Theta, b)) for b in dec]))
    return np.array(cols).T


def extremality(seed: PovmSeed, tol: float = DEFAULT_TOL,
                feas_tol: float = DEFAULT_FEAS_TOL) -> ExtremalityReport:
    """Decide extremality of a feasible seed.

    Xi = X^dag X is extremal iff the operators X Y_k (I (x) E_ab) Y_k^dag X^dag
    span all r x r matrices, r = rank(Xi). Otherwise a Hermitian B on the
    range of X with vanishing block partial traces gives the witness
    Theta = X^dag B X, and Xi +- t Theta stay feasible.
    """
    dec = seed.dec
    feas = check_seed(seed.xi, dec, feas_tol)
    if not feas.feasible:
        raise ContractViolation(f"seed is not feasible (residuals {feas.residuals}, "
                                f"min eigenvalue {feas.min_eigenvalue:.3e})")
    X = psd_factor(seed.xi, tol)
    r = X.shape[0]
    cands = []
    for b in dec:
        for i in range(b.multiplicity):
            for j in range(b.multiplicity):
                E = np.zeros((b.multiplicity, b.multiplicity), dtype=complex)
                E[i, j] = 1
                cands.append(X @ dec.embed(b, E) @ dagger(X))
    achieved, gap = span_stats(cands, tol)
    report = ExtremalityReport(
        is_extremal=achieved == r * r,
        rank=r,
        span_achieved=achieved,
        span_required=r * r,
        necessary_bound_ok=r * r <= dec.sum_sq_multiplicities(),
        sv_gap=gap,
    )
    if not report.is_extremal:
        report.witness, report.witness_step = _witness(seed.xi, X, dec, feas_tol)
    return report


def _witness(xi, X, dec, feas_tol):
    r = X.shape[0]
    x = kernel_direction(_constraint_columns(X, dec))
    B = sum(c * E for c, E in zip(x, hermitian_basis(r)))
    Theta = dagger(X) @ B @ X
    Theta = 0.5 * (Theta + dagger(Theta))
    t = max_step([B])
    for _ in range(60):
        if check_seed(xi + t * Theta, dec, feas_tol).feasible and check_seed(xi - t * Theta, dec, feas_tol).feasible:
            break
        t /= 2
    return Theta, t


def kraus_like_factors(seed: PovmSeed, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """W_i (d_h x m_h) from the spectral decomposition Xi = sum_i |W_i><W_i|,
    read in the aligned coordinates of a single-class decomposition."""
    if len(seed.dec) != 1:
        raise ContractViolation("single-class test needs a decomposition with exactly one class")
    blk = seed.dec.blocks[0]
    lam, V = np.linalg.eigh(0.5 * (seed.xi + dagger(seed.xi)))
    top = lam[-1]
    Ws = []
    for li, v in zip(lam, V.T):
        if top > 0 and li > tol * top:
            Ws.append(vec_to_op(dagger(blk.isometry) @ (np.sqrt(li) * v), (blk.irrep_dim, blk.multiplicity)))
    return Ws


def single_class_extremality(seed: PovmSeed, tol: float = DEFAULT_TOL) -> bool:
    """Extremal iff the r^2 products W_i^dag W_j are linearly independent."""
    Ws = kraus_like_factors(seed, tol)
    prods = [dagger(Wi) @ Wj for Wi in Ws for Wj in Ws]
    achieved, _ = span_stats(prods, tol)
    return achieved == len(Ws) ** 2


# ----------------------------------------------------------- seed builders


def normalize_seed(Z, dec: IsotypicDecomposition) -> np.ndarray:
    """Congruence by a commutant element that enforces the block constraints.

    Requires every block partial trace of the PSD operator Z to be
    invertible; the rank of Z is preserved.
    """
    Z = as_matrix(Z)
    T = np.zeros_like(Z)
    for b in dec:
        G = dec.block_partial_trace(Z, b) / b.irrep_dim
        lam, V = np.linalg.eigh(0.5 * (G + dagger(G)))
        if lam[0] <= 0:
            raise ContractViolation(f"block {b.label!r} partial trace is singular; cannot normalize")
        C = V @ np.diag(lam ** -0.5) @ dagger(V)
        T += dec.embed(b, C)
    out = dagger(T) @ Z @ T
    return 0.5 * (out + dagger(out))


def random_seed(dec: IsotypicDecomposition, rank: int, rng) -> np.ndarray:
    """Random feasible seed of the requested rank (needs rank >= max m_k)."""
    n = dec.carrier_dim
    A = rng.standard_normal((rank, n)) + 1j * rng.standard_normal((rank, n))
    return normalize_seed(dagger(A) @ A, dec)


def rank_one_seed(dec: IsotypicDecomposition, rng) -> np.ndarray:
    """Random rank-one feasible seed; exists only for multiplicity-free carriers."""
    if any(b.multiplicity != 1 for b in dec):
        raise ContractViolation("rank-one seeds need every multiplicity to be one")
    v = np.zeros(dec.carrier_dim, dtype=complex)
    for b in dec:
        u = rng.standard_normal(b.irrep_dim) + 1j * rng.standard_normal(b.irrep_dim)
        v += np.sqrt(b.irrep_dim) * b.isometry @ (u / np.linalg.norm(u))
    return np.outer(v, v.conj())
