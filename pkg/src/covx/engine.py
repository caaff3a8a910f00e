"""Pieces shared by the POVM and channel extremality tests.

Both tests have the same shape: a Hermitian parameter space (operators B
supported on the range of a factor X), a real-linear constraint map whose
kernel holds the admissible perturbations, and a family of candidate
operators whose complex span must fill the parameter space.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL
from .io import matrix_to_json
from .numkernel import numerical_rank, rank_gap, singular_values


@dataclass
class ExtremalityReport:
    is_extremal: bool
    rank: int
    span_achieved: int
    span_required: int
    necessary_bound_ok: bool
    witness: np.ndarray | None = field(default=None, repr=False)
    witness_step: float | None = None
    sv_gap: tuple = (0.0, 0.0)
    block_ranks: dict | None = None

    def to_json(self) -> dict:
        out = {
            "verdict": bool(self.is_extremal),
            "rank": int(self.rank),
            "span_achieved": int(self.span_achieved),
            "span_required": int(self.span_required),
            "bound_ok": bool(self.necessary_bound_ok),
            "sv_gap": {"min_kept": self.sv_gap[0], "max_dropped": self.sv_gap[1]},
        }
        if self.block_ranks is not None:
            out["block_ranks"] = {str(k): int(v) for k, v in self.block_ranks.items()}
        if self.witness is not None:
            out["witness"] = matrix_to_json(self.witness)
            out["witness_step"] = float(self.witness_step)
        return out


def span_stats(candidates, tol: float = DEFAULT_TOL):
    """(span dimension, rank gap) of a list of equally shaped arrays."""
    sv = singular_values([np.atleast_2d(c) for c in candidates])
    return numerical_rank(sv, tol), rank_gap(sv, tol)


def kernel_direction(columns: np.ndarray) -> np.ndarray:
    """Unit vector minimizing |A x| for the real matrix A (exact kernel
    element whenever A is rank deficient)."""
    if columns.shape[0] == 0:
        x = np.zeros(columns.shape[1])
        x[0] = 1.0
        return x
    _, _, Vt = np.linalg.svd(columns)
    return Vt[-1]


def max_step(B_blocks, scale: float = 0.5) -> float:
    """Step t keeping every I + t B_k and I - t B_k positive definite."""
    top = max(float(np.max(np.abs(np.linalg.eigvalsh(B)))) for B in B_blocks if B.size)
    return scale / top
