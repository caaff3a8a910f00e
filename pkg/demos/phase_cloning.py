"""Phase-covariant qubit cloning, end to end.

Run: python3 demos/phase_cloning.py   (about 10 s; pass --with-1to3 for the slower 1 -> 3 search)
"""
import sys

import numpy as np

from covx.channels import (builtin_examples, check_tni, clone12_states, cloning_fidelity_operator,
                           covariance_check, from_commutant, qo_extremality, qubit_phase_rep)
from covx.optimizer import ConvexSetSpec, maximize_linear, round_to_extreme
from covx.reps import isotypic_decompose


def show_blocks(n_out):
    dec = isotypic_decompose(qubit_phase_rep(n_out))
    table = ", ".join(f"k={b.label}: m={b.multiplicity}" for b in dec)
    print(f"1 -> {n_out}: weight blocks of V (x) U*  ->  {table}")


def main():
    show_blocks(2)
    show_blocks(3)

    cov, meta = builtin_examples("clone12")
    print(f"\nrank-two cloner: F = {meta['fidelity']:.10f}   (2 + sqrt 2)/4 = {(2 + np.sqrt(2)) / 4:.10f}")
    print("  trace-preserving:", check_tni(cov).status, " covariance residual:", covariance_check(cov, meta["rep"]))
    rep = qo_extremality(cov)
    print(f"  extremality: span {rep.span_achieved}/{rep.span_required} -> extremal = {rep.is_extremal}")

    # why: the two vectors have equal input marginals, so each one alone is a channel
    p0, p1 = clone12_states()
    W = meta["W"]
    for i, p in enumerate((p0, p1)):
        R = 2 * np.outer(p, p.conj())
        print(f"  endpoint {i}: {check_tni(R, dim_in=2, dim_out=4).status}, "
              f"F = {np.trace(W @ R).real:.10f}, covariance residual {covariance_check(R, meta['rep']):.1e}")

    spec = ConvexSetSpec.channel(isotypic_decompose(meta["rep"]), 2, 4)
    Z, ext = round_to_extreme(cov.R, W, spec)
    print(f"  walking along the witness lands on a rank-{np.linalg.matrix_rank(Z, 1e-8)} extremal point "
          f"(extremal = {ext}) with the same F = {np.trace(W @ Z).real:.10f}")

    print("\nsearching the covariant channels directly ...")
    res = maximize_linear(cloning_fidelity_operator(2), spec)
    print(f"  best value {res.value:.10f} after {res.iterations} iterations "
          f"(restart values {np.round(res.restart_values, 8).tolist()})")
    cov_opt = from_commutant(res.maximizer, spec.dec, 2, 4, tol=1e-6)
    print("  maximizer extremal:", qo_extremality(cov_opt).is_extremal)

    cov3, meta3 = builtin_examples("clone13")
    print(f"\nrank-one 1 -> 3 cloner: F = {meta3['fidelity']:.10f}, extremal = {qo_extremality(cov3).is_extremal}")
    if "--with-1to3" in sys.argv:
        spec3 = ConvexSetSpec.channel(isotypic_decompose(meta3["rep"]), 2, 8)
        res3 = maximize_linear(meta3["W"], spec3)
        print(f"  optimizer over 1 -> 3 channels: {res3.value:.10f}")


if __name__ == "__main__":
    main()
