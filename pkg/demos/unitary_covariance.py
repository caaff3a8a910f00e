"""Channels covariant under all of SU(d).

Run: python3 demos/unitary_covariance.py
"""
import numpy as np

from covx.channels import apply_channel, builtin_examples, from_commutant, qo_extremality
from covx.numkernel import partial_trace
from covx.reps import SUdTensor, isotypic_decompose


def main():
    for d in (2, 3):
        print(f"--- d = {d}")
        rep = SUdTensor(d, "u_ustar")
        dec = isotypic_decompose(rep)
        I = np.eye(d).reshape(-1)
        P0 = np.outer(I, I) / d
        ident = from_commutant(d * P0, dec, d, d)
        depol = from_commutant(d / (d * d - 1) * (np.eye(d * d) - P0), dec, d, d)
        rho = np.diag(np.arange(1, d + 1) / (d * (d + 1) / 2))
        print("identity channel:  extremal =", qo_extremality(ident).is_extremal)
        print("opposite channel:  extremal =", qo_extremality(depol).is_extremal,
              " output diag:", np.round(np.diag(apply_channel(depol, rho)).real, 4))
        for lam in (0.3, 0.7):
            mix = from_commutant(lam * ident.R + (1 - lam) * depol.R, dec, d, d)
            r = qo_extremality(mix)
            print(f"mixture lam={lam}:  extremal = {r.is_extremal}, span {r.span_achieved}/{r.span_required}, "
                  f"witness step {r.witness_step:.3f}")

        star = SUdTensor(d, "ustar_ustar")
        for label, name in (("+", "transpose_plus"), ("-", "transpose_minus")):
            P = star.projectors()[label]
            marg = partial_trace(P, (d, d), [1])
            cov, _ = builtin_examples(name, d)
            print(f"P{label}: marginal = {marg[0, 0].real:.3f} * I,  R{label} extremal = {qo_extremality(cov).is_extremal}")


if __name__ == "__main__":
    main()
