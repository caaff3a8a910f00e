"""Choi operators of quantum operations, with and without covariance.

Layout: R acts on K (x) H with the output factor K first. A Kraus operator
A: H -> K contributes its row-major vectorization |A>> = (A (x) I)|I>, so

    R = sum_i |A_i>><<A_i|,      M^v(rho) = Tr_H[(I_K (x) rho^T) R].

The Heisenberg picture map is M(X) = Tr_K[R (X (x) I_H)]^T; the operator
K := Tr_K[R] therefore equals M(I)^T, and the constraints 0 <= M(I) <= I
and 0 <= Tr_K[R] <= I are the same condition. Covariance
M^v(U_g rho U_g^dag) = V_g M^v(rho) V_g^dag is [R, V_g (x) U_g^*] = 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_FEAS_TOL, DEFAULT_TOL
from .engine import ExtremalityReport, kernel_direction, max_step, span_stats
from .errors import ContractViolation, DimensionError
from .numkernel import (as_matrix, dagger, herm_to_real, hermitian_basis, is_psd, op_to_vec,
                        partial_trace, psd_factor, vec_to_op)
from .reps import (IsotypicDecomposition, Representation, SUdTensor, U1Weights, conjugate,
                   isotypic_decompose, swap_operator, tensor)


@dataclass(frozen=True)
class ChoiOperator:
    R: np.ndarray
    dim_in: int
    dim_out: int

    def __post_init__(self):
        R = as_matrix(self.R)
        n = int(self.dim_in) * int(self.dim_out)
        if R.shape != (n, n):
            raise DimensionError(f"Choi matrix of shape {R.shape} does not match dim_out*dim_in = {n}")
        object.__setattr__(self, "R", R)

    @property
    def dims(self):
        return (self.dim_out, self.dim_in)

    @property
    def K(self) -> np.ndarray:
        """Tr_K[R], an operator on the input space."""
        return partial_trace(self.R, self.dims, [0])


def _choi(R, dim_in=None, dim_out=None) -> ChoiOperator:
    if isinstance(R, ChoiOperator):
        return R
    if isinstance(R, CovariantChoi):
        return R.base
    if dim_in is None or dim_out is None:
        raise DimensionError("a bare matrix needs dim_in and dim_out")
    return ChoiOperator(R, dim_in, dim_out)


def choi_from_kraus(ops) -> ChoiOperator:
    ops = [as_matrix(A) for A in ops]
    if not ops:
        raise DimensionError("empty Kraus set")
    shape = ops[0].shape
    if any(A.shape != shape for A in ops):
        raise DimensionError("Kraus operators must share a shape")
    vecs = np.stack([op_to_vec(A) for A in ops], axis=1)
    return ChoiOperator(vecs @ dagger(vecs), dim_in=shape[1], dim_out=shape[0])


def kraus_from_choi(choi, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """Canonical Kraus set sqrt(lambda_i)|v_i> from the spectral decomposition of R."""
    X = psd_factor(choi.R, tol)
    return [vec_to_op(row.conj(), (choi.dim_out, choi.dim_in)) for row in X]


def apply_channel(choi, rho, dim_in=None, dim_out=None) -> np.ndarray:
    choi = _choi(choi, dim_in, dim_out)
    rho = as_matrix(rho)
    if rho.shape != (choi.dim_in,) * 2:
        raise DimensionError(f"input of shape {rho.shape} for a channel on dimension {choi.dim_in}")
    return partial_trace(np.kron(np.eye(choi.dim_out), rho.T) @ choi.R, choi.dims, [1])


def apply_heisenberg(choi, X, dim_in=None, dim_out=None) -> np.ndarray:
    choi = _choi(choi, dim_in, dim_out)
    X = as_matrix(X)
    if X.shape != (choi.dim_out,) * 2:
        raise DimensionError(f"observable of shape {X.shape} for output dimension {choi.dim_out}")
    return partial_trace(choi.R @ np.kron(X, np.eye(choi.dim_in)), choi.dims, [0]).T


TRACE_PRESERVING = "trace-preserving"
TRACE_NONINCREASING = "trace-nonincreasing"
VIOLATING = "violating"


@dataclass
class TniVerdict:
    status: str
    cp: bool
    K: np.ndarray = field(repr=False)
    k_min: float
    k_max: float
    tp_residual: float

    @property
    def ok(self) -> bool:
        return self.status != VIOLATING

    def to_json(self) -> dict:
        return {"verdict": self.status, "cp": self.cp, "k_min": self.k_min, "k_max": self.k_max,
                "tp_residual": self.tp_residual}


def check_tni(choi, tol: float = DEFAULT_FEAS_TOL, dim_in=None, dim_out=None) -> TniVerdict:
    choi = _choi(choi, dim_in, dim_out)
    K = choi.K
    cp = is_psd(choi.R, tol)
    lam = np.linalg.eigvalsh(0.5 * (K + dagger(K)))
    tp_res = float(np.linalg.norm(K - np.eye(choi.dim_in), 2))
    herm = float(np.linalg.norm(K - dagger(K))) <= tol * max(1.0, float(np.linalg.norm(K)))
    if not (cp and herm) or lam[0] < -tol or lam[-1] > 1 + tol:
        status = VIOLATING
    elif tp_res <= tol:
        status = TRACE_PRESERVING
    else:
        status = TRACE_NONINCREASING
    return TniVerdict(status, cp, K, float(lam[0]), float(lam[-1]), tp_res)


def channel_rep(rep_out: Representation, rep_in: Representation) -> Representation:
    """The representation V_g (x) U_g^* that a covariant Choi operator commutes with."""
    return tensor(rep_out, conjugate(rep_in))


def covariance_check(R, rep: Representation, rep_in: Representation | None = None) -> float:
    """Largest commutator norm of R with the carrier representation.

    With two representations, ``rep`` is V on the output and ``rep_in`` is U
    on the input; with one it is the carrier representation itself.
    """
    if isinstance(R, (ChoiOperator, CovariantChoi)):
        R = _choi(R).R
    carrier = rep if rep_in is None else channel_rep(rep, rep_in)
    return carrier.commutator_residual(carrier._check_operand(R))


# ------------------------------------------------------------ covariant form


@dataclass(frozen=True)
class CovariantChoi:
    """R = sum_k Y_k (I_{d_k} (x) w_k^dag w_k) Y_k^dag in a fixed decomposition."""

    base: ChoiOperator
    dec: IsotypicDecomposition
    blocks: dict

    @property
    def R(self) -> np.ndarray:
        return self.base.R

    @property
    def dim_in(self):
        return self.base.dim_in

    @property
    def dim_out(self):
        return self.base.dim_out

    @property
    def K(self):
        return self.base.K

    def gram(self, label) -> np.ndarray:
        w = self.blocks[label]
        return dagger(w) @ w


def covariant_choi(blocks: dict, dec: IsotypicDecomposition, dim_in: int, dim_out: int) -> CovariantChoi:
    if dim_in * dim_out != dec.carrier_dim:
        raise DimensionError(f"dim_out*dim_in = {dim_in * dim_out} but the carrier has dimension {dec.carrier_dim}")
    unknown = set(blocks) - set(dec.labels)
    if unknown:
        raise DimensionError(f"unknown block labels {sorted(map(str, unknown))}")
    full = {}
    R = np.zeros((dec.carrier_dim,) * 2, dtype=complex)
    for b in dec:
        w = as_matrix(blocks.get(b.label, np.zeros((b.multiplicity, b.multiplicity))))
        if w.shape[1] != b.multiplicity:
            raise DimensionError(f"block {b.label!r}: w has {w.shape[1]} columns, multiplicity is {b.multiplicity}")
        full[b.label] = w
        R += dec.embed(b, dagger(w) @ w)
    return CovariantChoi(ChoiOperator(R, dim_in, dim_out), dec, full)


def _sqrt_psd(Q):
    lam, V = np.linalg.eigh(0.5 * (Q + dagger(Q)))
    return V @ np.diag(np.sqrt(np.clip(lam, 0, None))) @ dagger(V)


def from_commutant(R, dec: IsotypicDecomposition, dim_in: int, dim_out: int,
                   tol: float = DEFAULT_FEAS_TOL) -> CovariantChoi:
    """Wrap an operator already in the commutant; w_k is the PSD square root of the block Gram matrix."""
    R = as_matrix(R)
    drift = float(np.linalg.norm(R - dec.commutant_twirl(R)))
    if drift > tol * max(1.0, float(np.linalg.norm(R))):
        raise ContractViolation(f"operator is not covariant (distance to commutant {drift:.3e})")
    blocks = {b.label: _sqrt_psd(dec.block_partial_trace(R, b) / b.irrep_dim) for b in dec}
    return CovariantChoi(ChoiOperator(R, dim_in, dim_out), dec, blocks)


def project_covariant(R, rep: Representation, dim_in: int, dim_out: int,
                      tol: float = DEFAULT_TOL) -> CovariantChoi:
    """Twirl R onto the commutant of the carrier representation."""
    dec = isotypic_decompose(rep, tol)
    T = dec.commutant_twirl(as_matrix(R))
    return from_commutant(0.5 * (T + dagger(T)), dec, dim_in, dim_out, tol=1e-6)


# ------------------------------------------------------------- extremality


def _block_factors(cov: CovariantChoi, tol: float):
    """X_k with X_k^dag X_k = Q_k, zero rows dropped relative to the largest block eigenvalue."""
    grams = {b.label: cov.dec.block_partial_trace(cov.R, b) / b.irrep_dim for b in cov.dec}
    top = max((float(np.linalg.eigvalsh(0.5 * (Q + dagger(Q)))[-1]) for Q in grams.values()), default=0.0)
    out = []
    for b in cov.dec:
        Q = 0.5 * (grams[b.label] + dagger(grams[b.label]))
        lam, V = np.linalg.eigh(Q)
        keep = lam > tol * top
        X = np.sqrt(lam[keep])[::-1, None] * dagger(V[:, keep][:, ::-1])
        out.append((b, X))
    return out


def _input_maps(cov: CovariantChoi, b):
    dK = cov.dim_out
    dH = cov.dim_in
    for a in range(dH):
        for c in range(dH):
            E = np.zeros((dH, dH), dtype=complex)
            E[a, c] = 1
            yield cov.dec.block_partial_trace(np.kron(np.eye(dK), E), b)


def qo_extremality(cov: CovariantChoi, tol: float = DEFAULT_TOL,
                   feas_tol: float = DEFAULT_FEAS_TOL) -> ExtremalityReport:
    """Extremality among covariant operations sharing K = Tr_K[R].

    R is extremal iff O = (+)_k O_k -> Tr_K[sum_k Y_k (I (x) X_k^dag O_k X_k) Y_k^dag]
    is injective, i.e. iff the operators (+)_k X_k Tr_{H_k}(Y_k^dag (I (x) E_ab) Y_k) X_k^dag
    span the whole block algebra (+)_k B(C^{r_k}).
    """
    verdict = check_tni(cov.base, feas_tol)
    if verdict.status == VIOLATING:
        raise ContractViolation("Choi operator is not a trace-nonincreasing CP map")
    facs = [(b, X) for b, X in _block_factors(cov, tol) if X.shape[0]]
    ranks = {b.label: X.shape[0] for b, X in _block_factors(cov, tol)}
    required = sum(X.shape[0] ** 2 for _, X in facs)
    maps = {b.label: list(_input_maps(cov, b)) for b, _ in facs}
    cands = []
    for ab in range(cov.dim_in ** 2):
        cands.append(np.concatenate([op_to_vec(X @ maps[b.label][ab] @ dagger(X)) for b, X in facs])[None, :])
    achieved, gap = span_stats(cands, tol)
    report = ExtremalityReport(
        is_extremal=achieved == required,
        rank=sum(b.irrep_dim * X.shape[0] for b, X in facs),
        span_achieved=achieved,
        span_required=required,
        necessary_bound_ok=required <= cov.dim_in ** 2,
        sv_gap=gap,
        block_ranks=ranks,
    )
    if not report.is_extremal:
        report.witness, report.witness_step = _qo_witness(cov, facs, feas_tol)
    return report


def _embed_perturbation(cov, facs, x):
    S = np.zeros((cov.dec.carrier_dim,) * 2, dtype=complex)
    Os = []
    pos = 0
    for b, X in facs:
        r = X.shape[0]
        O = sum(c * E for c, E in zip(x[pos:pos + r * r], hermitian_basis(r)))
        pos += r * r
        Os.append(O)
        S += cov.dec.embed(b, dagger(X) @ O @ X)
    return 0.5 * (S + dagger(S)), Os


def _qo_witness(cov, facs, feas_tol):
    dims = (cov.dim_out, cov.dim_in)
    n = sum(X.shape[0] ** 2 for _, X in facs)
    cols = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1
        S, _ = _embed_perturbation(cov, facs, e)
        cols.append(herm_to_real(partial_trace(S, dims, [0])))
    x = kernel_direction(np.array(cols).T)
    S, Os = _embed_perturbation(cov, facs, x)
    t = max_step(Os)
    for _ in range(60):
        if all(is_psd(cov.R + s * t * S, feas_tol) for s in (1, -1)):
            break
        t /= 2
    return S, t


def choi_extremality_noncov(ops, tol: float = DEFAULT_TOL) -> bool:
    """Choi's criterion: extremal iff {W_i^dag W_j} is linearly independent.

    The test is run on the canonical Kraus set of the Choi operator built
    from ``ops``, so redundant input sets give the right answer too.
    """
    Ws = kraus_from_choi(choi_from_kraus(ops), tol)
    achieved, _ = span_stats([dagger(A) @ B for A in Ws for B in Ws], tol)
    return achieved == len(Ws) ** 2


# ---------------------------------------------------------- built-in cases


def _ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v


def _state(terms) -> np.ndarray:
    return sum(c * _ket(bits) for bits, c in terms)


def qubit_phase_rep(n_out: int) -> U1Weights:
    """V_phi (x) U_phi^* for U_phi = exp(i phi |1><1|) on one input and n_out output qubits."""
    single = U1Weights([0, 1])
    out = single
    for _ in range(n_out - 1):
        out = tensor(out, single)
    return channel_rep(out, single)


_PLUS = np.full((2, 2), 0.5, dtype=complex)
_MINUS = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex)


def cloning_fidelity_operator(n_out: int = 2) -> np.ndarray:
    """Cost W with F = Tr[W R] for equatorial cloning, evaluated at |+>.

    For n_out outputs it averages |+><+|_s (x) I_rest over output slots s,
    tensored with |+><+| on the input (which is its own transpose). For
    two outputs this is |+><+|^3 + (|-><-| (x) |+><+| + |+><+| (x) |-><-|)/2 (x) |+><+|.
    """
    if n_out < 1:
        raise ValueError("n_out must be positive")
    acc = np.zeros((2 ** n_out,) * 2, dtype=complex)
    for s in range(n_out):
        term = np.eye(1)
        for j in range(n_out):
            term = np.kron(term, _PLUS if j == s else np.eye(2))
        acc += term
    return np.kron(acc / n_out, _PLUS)


def clone12_states():
    h = 1 / np.sqrt(2)
    psi0 = h * _state([("000", 1), ("011", h), ("101", h)])
    psi1 = h * _state([("111", 1), ("100", h), ("010", h)])
    return psi0, psi1


def clone13_state():
    return _state([(b, 1 / np.sqrt(3)) for b in ("1000", "0100", "0010", "1101", "1011", "0111")])


def table2_rows(params=None) -> dict:
    """Vectors spanning R for each classified block set of 1 -> 2 cloning.

    ``params`` maps a row name to its free coefficients; omitted rows use
    a fixed admissible choice. Coefficients must satisfy the row's norm
    constraints for R to be trace-preserving.
    """
    p = dict(params or {})
    s = np.sqrt
    rows = {}
    rows["-1,2"] = [_ket("001"), _ket("110")]
    a, b, c, a2, b2, c2 = p.get("0,1", (s(.5), s(.25), s(.25), s(.5), s(.25), s(.25)))
    rows["0,1"] = [_state([("000", a), ("011", b), ("101", c)]), _state([("111", a2), ("100", b2), ("010", c2)])]
    a, b, c = p.get("0,-1", (s(.5), s(.25), s(.25)))
    rows["0,-1"] = [_state([("000", 1), ("011", a), ("101", b)]), c * _ket("001")]
    a, b, c, d = p.get("1,-1", (s(.5), s(.5), s(.5), s(.5)))
    rows["1,-1"] = [_state([("100", a), ("010", b), ("111", c)]), d * _ket("001")]
    a, b, d = p.get("1,2", (s(.25), s(.25), s(.5)))
    rows["1,2"] = [_state([("100", a), ("010", b), ("111", 1)]), d * _ket("110")]
    a, b, c, d = p.get("0,2", (s(.5), s(.5), s(.5), s(.5)))
    rows["0,2"] = [_state([("000", a), ("011", b), ("101", c)]), d * _ket("110")]
    rows["0"] = [(_ket("101") + _ket("011")) / s(2), _ket("000")]
    rows["1"] = [(_ket("010") + _ket("100")) / s(2), _ket("111")]
    return rows


def choi_from_vectors(vecs) -> np.ndarray:
    V = np.stack(vecs, axis=1)
    return V @ dagger(V)


BUILTIN_NAMES = ("clone12", "clone13", "depolarizing", "transpose_plus", "transpose_minus")


def builtin_examples(name: str, d: int | None = None):
    """(CovariantChoi, metadata) for a named reference operation.

    Metadata holds the expected verdicts and, for the cloners, the cost
    operator and the fidelity Tr[W R] evaluated at the returned R.
    """
    if name == "clone12":
        rep = qubit_phase_rep(2)
        R = choi_from_vectors(clone12_states())
        dims = (2, 4)
        W = cloning_fidelity_operator(2)
        meta = {"rank": 2}
    elif name == "clone13":
        rep = qubit_phase_rep(3)
        R = choi_from_vectors([clone13_state()])
        dims = (2, 8)
        W = cloning_fidelity_operator(3)
        meta = {"rank": 1}
    elif name in ("depolarizing", "transpose_plus", "transpose_minus"):
        d = 2 if d is None else int(d)
        if d < 2:
            raise ValueError("d must be at least 2")
        dims = (d, d)
        if name == "depolarizing":
            rep = SUdTensor(d, "u_ustar")
            I = op_to_vec(np.eye(d))
            R = d / (d * d - 1) * (np.eye(d * d) - np.outer(I, I) / d)
            meta = {"rank": d * d - 1}
        else:
            rep = SUdTensor(d, "ustar_ustar")
            sgn = 1 if name == "transpose_plus" else -1
            R = (np.eye(d * d) + sgn * swap_operator(d)) / (d + sgn)
            meta = {"rank": d * (d + sgn) // 2}
        W = None
    else:
        raise ValueError(f"unknown example {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    dec = isotypic_decompose(rep)
    cov = from_commutant(R, dec, *dims)
    meta.update(name=name, extremal=True, trace_preserving=True, rep=rep)
    if W is not None:
        meta["W"] = W
        meta["fidelity"] = float(np.real(np.trace(W @ R)))
    return cov, meta
