"""Linear objectives Tr[W Z] over the covariant POVM-seed and channel sets.

Points are stored as real coordinate vectors. POVM seeds use the whole
n x n Hermitian space; covariant channels use commutant coordinates
q_k = sqrt(d_k) Q_k with R = sum_k Y_k (I (x) Q_k) Y_k^dag, which makes
the coordinate map an isometry into the ambient space, so Euclidean
projections in coordinates are ambient projections onto the commutant.

The search is projected gradient ascent with a Dykstra projection, then
a walk along extremality witnesses that ends at an extreme point without
lowering the objective.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .errors import ContractViolation, DimensionError, ProjectionError
from .numkernel import as_matrix, dagger, herm_to_real, is_hermitian, partial_trace, psd_factor, real_to_herm
from .reps import IsotypicDecomposition

POVM = "povm"
CHANNEL = "channel"


@dataclass(frozen=True)
class ConvexSetSpec:
    kind: str
    dec: IsotypicDecomposition
    K: np.ndarray | None = None
    dim_in: int | None = None
    dim_out: int | None = None

    @classmethod
    def povm(cls, dec):
        return cls(POVM, dec)

    @classmethod
    def channel(cls, dec, dim_in: int, dim_out: int, K=None):
        if dim_in * dim_out != dec.carrier_dim:
            raise DimensionError(f"dim_out*dim_in = {dim_in * dim_out} but the carrier has dimension {dec.carrier_dim}")
        K = np.eye(dim_in, dtype=complex) if K is None else as_matrix(K)
        if K.shape != (dim_in, dim_in):
            raise DimensionError(f"target K of shape {K.shape} for input dimension {dim_in}")
        return cls(CHANNEL, dec, K, dim_in, dim_out)


@dataclass(frozen=True)
class CostOperator:
    W: np.ndarray

    def __post_init__(self):
        W = as_matrix(self.W)
        if not is_hermitian(W, 1e-9):
            raise ContractViolation("cost operator must be Hermitian")
        object.__setattr__(self, "W", 0.5 * (W + dagger(W)))


@dataclass
class OptimizationResult:
    maximizer: np.ndarray = field(repr=False)
    value: float
    iterations: int
    converged: bool
    restart_values: list
    best_restart: int
    extremal: bool | None = None

    def to_json(self) -> dict:
        from .io import matrix_to_json
        return {"maximizer": matrix_to_json(self.maximizer), "value": self.value,
                "iterations": self.iterations, "converged": self.converged,
                "restart_values": self.restart_values, "best_restart": self.best_restart,
                "extremal": self.extremal}


class _Coords:
    """Real coordinates, constraint matrix and PSD structure for one set."""

    def __init__(self, spec: ConvexSetSpec):
        self.spec = spec
        dec = spec.dec
        n = dec.carrier_dim
        if spec.kind == POVM:
            self.sizes = [n]
            self.weights = [1.0]
        elif spec.kind == CHANNEL:
            self.sizes = [b.multiplicity for b in dec]
            self.weights = [float(b.irrep_dim) for b in dec]
        else:
            raise ValueError(f"unknown set kind {spec.kind!r}")
        self.slices = []
        pos = 0
        for s in self.sizes:
            self.slices.append(slice(pos, pos + s * s))
            pos += s * s
        self.dim = pos
        cols = [self.constraint(self.ambient(e)) for e in np.eye(self.dim)]
        self.A = np.array(cols).T
        self.b = self._target()
        self.A_pinv = np.linalg.pinv(self.A, rcond=1e-12)
        gap = float(np.linalg.norm(self.A @ (self.A_pinv @ self.b) - self.b))
        if gap > 1e-8 * max(1.0, float(np.linalg.norm(self.b))):
            raise ContractViolation(f"affine constraints are inconsistent (residual {gap:.3e})")

    def _target(self):
        if self.spec.kind == POVM:
            return np.concatenate([herm_to_real(b.irrep_dim * np.eye(b.multiplicity)) for b in self.spec.dec])
        return herm_to_real(self.spec.K)

    def constraint(self, Z):
        if self.spec.kind == POVM:
            return np.concatenate([herm_to_real(self.spec.dec.block_partial_trace(Z, b)) for b in self.spec.dec])
        return herm_to_real(partial_trace(Z, (self.spec.dim_out, self.spec.dim_in), [0]))

    def blocks(self, x):
        return [real_to_herm(x[sl], s) / np.sqrt(w) for sl, s, w in zip(self.slices, self.sizes, self.weights)]

    def ambient(self, x):
        if self.spec.kind == POVM:
            return real_to_herm(x, self.sizes[0])
        dec = self.spec.dec
        return sum(dec.embed(b, Q) for b, Q in zip(dec, self.blocks(x)))

    def coords(self, Z):
        Z = as_matrix(Z)
        if self.spec.kind == POVM:
            return herm_to_real(0.5 * (Z + dagger(Z)))
        dec = self.spec.dec
        parts = []
        for b in dec:
            Q = dec.block_partial_trace(Z, b) / b.irrep_dim
            parts.append(herm_to_real(np.sqrt(b.irrep_dim) * 0.5 * (Q + dagger(Q))))
        return np.concatenate(parts)

    def affine(self, x):
        return x - self.A_pinv @ (self.A @ x - self.b)

    def affine_residual(self, x):
        return float(np.max(np.abs(self.A @ x - self.b))) if self.b.size else 0.0

    def clip(self, x):
        out = np.empty_like(x)
        for sl, s in zip(self.slices, self.sizes):
            lam, V = np.linalg.eigh(real_to_herm(x[sl], s))
            out[sl] = herm_to_real((V * np.clip(lam, 0, None)) @ dagger(V))
        return out

    def min_eig(self, x):
        return min(float(np.linalg.eigvalsh(real_to_herm(x[sl], s))[0]) for sl, s in zip(self.slices, self.sizes))

    def canonical(self):
        if self.spec.kind == POVM:
            return herm_to_real(np.eye(self.sizes[0]))
        dK = self.spec.dim_out
        R0 = np.kron(np.eye(dK), self.spec.K) / dK
        return self.coords(self.spec.dec.commutant_twirl(R0))


def _project(co: _Coords, x, feas_tol: float, max_iter: int = 20000, interior=None):
    """Dykstra alternating projection onto {affine} and {PSD blocks}."""
    y = np.array(x, dtype=float)
    q = np.zeros_like(y)
    for _ in range(max_iter):
        z = co.affine(y)
        lam = co.min_eig(z)
        if lam >= -feas_tol:
            break
        y_new = co.clip(z + q)
        q = z + q - y_new
        y = y_new
    else:
        raise ProjectionError(f"projection stalled with PSD violation {-lam:.3e}", residual=-lam)
    if lam < 0 and interior is not None:
        # pull the small negative part inside along the segment to a strictly feasible point
        lam0 = co.min_eig(interior)
        if lam0 > 0:
            s = -lam / (lam0 - lam)
            z = (1 - s) * z + s * interior
    return z


def project_feasible(Z, spec: ConvexSetSpec, cfg: RunConfig | None = None) -> np.ndarray:
    """Feasible point near Z (ambient in, ambient out)."""
    cfg = cfg or RunConfig()
    Z = as_matrix(Z)
    if not is_hermitian(Z, 1e-9):
        raise ContractViolation("projection input must be Hermitian")
    co = _Coords(spec)
    return co.ambient(_project(co, co.coords(Z), cfg.feas_tol, interior=co.canonical()))


def _ascent(co, c, x0, step, feas_tol, max_iter, patience=50, rel=1e-8):
    interior = co.canonical()
    x = _project(co, x0, feas_tol, interior=interior)
    best_x, best_f = x, float(c @ x)
    f_prev = best_f
    calm = 0
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        x = _project(co, x + step * c, feas_tol, interior=interior)
        f = float(c @ x)
        if f >= best_f:
            best_x, best_f = x, f
        if abs(f - f_prev) <= rel * max(1.0, abs(f_prev)):
            calm += 1
            if calm >= patience:
                converged = True
                break
        else:
            calm = 0
        f_prev = f
    return best_x, best_f, it, converged


def _extremality(spec, Z, cfg):
    if spec.kind == POVM:
        from .povm import PovmSeed, extremality
        return extremality(PovmSeed(Z, spec.dec), cfg.tol, cfg.feas_tol)
    from .channels import from_commutant, qo_extremality
    cov = from_commutant(Z, spec.dec, spec.dim_in, spec.dim_out, tol=1e-6)
    return qo_extremality(cov, cfg.tol, cfg.feas_tol)


def round_to_extreme(Z, W, spec: ConvexSetSpec, cfg: RunConfig | None = None, max_steps: int | None = None):
    """Walk along witnesses to the boundary until the point is extremal.

    Each step moves in the witness direction that does not decrease
    Tr[W Z], as far as positivity allows, so the rank drops every step.
    """
    cfg = cfg or RunConfig()
    Z = as_matrix(Z)
    max_steps = max_steps or Z.shape[0] + 1
    for _ in range(max_steps):
        rep = _extremality(spec, Z, cfg)
        if rep.is_extremal:
            return Z, True
        Theta = rep.witness
        X = psd_factor(Z, cfg.tol)
        Xp = np.linalg.pinv(X)
        B = dagger(Xp) @ Theta @ Xp
        B = 0.5 * (B + dagger(B))
        sgn = 1.0 if np.real(np.trace(W @ Theta)) >= 0 else -1.0
        lam = np.linalg.eigvalsh(-sgn * B)
        if lam[-1] <= 0:
            raise ContractViolation("witness direction is unbounded; the feasible set is not compact")
        t = 1.0 / lam[-1]
        Z = dagger(X) @ (np.eye(X.shape[0]) + t * sgn * B) @ X
        Z = 0.5 * (Z + dagger(Z))
    rep = _extremality(spec, Z, cfg)
    return Z, rep.is_extremal


def maximize_linear(W, spec: ConvexSetSpec, cfg: RunConfig | None = None, restarts: int = 4,
                    max_iter: int = 100_000, round_extreme: bool = True) -> OptimizationResult:
    """Maximize Tr[W Z]; run 0 starts at the canonical point, runs 1..restarts at seeded random points."""
    cfg = cfg or RunConfig()
    cost = W if isinstance(W, CostOperator) else CostOperator(W)
    co = _Coords(spec)
    if cost.W.shape != (spec.dec.carrier_dim,) * 2:
        raise DimensionError(f"cost of shape {cost.W.shape} on a carrier of dimension {spec.dec.carrier_dim}")
    # the coordinate map is an isometry, so the gradient is the coordinate image of W
    c = co.coords(cost.W)
    wnorm = float(np.linalg.norm(cost.W, 2))
    step = 1.0 / wnorm if wnorm > 0 else 1.0
    values, runs = [], []
    total_it = 0
    all_conv = True
    for i in range(restarts + 1):
        if i == 0:
            x0 = co.canonical()
        else:
            rng = np.random.default_rng([cfg.rng_seed, i])
            x0 = co.canonical() + rng.standard_normal(co.dim)
        x, f, it, conv = _ascent(co, c, x0, step, cfg.feas_tol, max_iter)
        total_it += it
        all_conv &= conv
        values.append(f)
        runs.append(x)
    best = int(np.argmax(values))
    Z = co.ambient(runs[best])
    extremal = None
    if round_extreme:
        Z, extremal = round_to_extreme(Z, cost.W, spec, cfg)
    value = float(np.real(np.trace(cost.W @ Z)))
    return OptimizationResult(Z, value, total_it, all_conv, values, best, extremal)
