"""Covariant POVM seeds: feasibility, extremality and witnesses.

Run: python3 demos/povm_seeds.py
"""
import numpy as np

from covx.config import RunConfig
from covx.optimizer import ConvexSetSpec, maximize_linear
from covx.povm import PovmSeed, check_seed, extremality, normalization, probability_density, random_seed
from covx.reps import GroupElement, U1Weights, heisenberg_weyl, isotypic_decompose


def describe(label, seed):
    r = extremality(seed)
    print(f"{label}: rank {r.rank}, span {r.span_achieved}/{r.span_required}, extremal = {r.is_extremal}")
    return r


def main():
    # phase estimation on span{|0>,...,|3>}: every weight appears once, so the
    # block constraints only fix the diagonal of the seed
    dec = isotypic_decompose(U1Weights([0, 1, 2, 3]))
    e = np.ones(4)
    canonical = PovmSeed(np.outer(e, e), dec)
    describe("all-ones seed", canonical)
    err = np.linalg.norm(normalization(canonical) - np.eye(4))
    print(f"  normalization error {err:.1e}")
    rho = np.outer(e, e) / 4
    for phi in (0.0, np.pi / 2, np.pi):
        print(f"  density at phi = {phi:.3f}: {probability_density(canonical, rho, GroupElement(angle=phi)):.6f}")

    # average of two rank-one seeds sharing a 2-d span: not extremal
    em = np.array([1, -1, 1, -1.0])
    mid = PovmSeed(0.5 * (np.outer(e, e) + np.outer(em, em)), dec)
    r = describe("\nmidpoint seed", mid)
    t = r.witness_step
    for s in (1, -1):
        f = check_seed(mid.xi + s * t * r.witness, dec)
        print(f"  Xi {'+' if s > 0 else '-'} t*Theta feasible: {f.feasible} (min eigenvalue {f.min_eigenvalue:.2e})")

    # an irreducible group admits only rank-one extremal seeds
    dec3 = isotypic_decompose(heisenberg_weyl(3))
    rng = np.random.default_rng(RunConfig().rng_seed)
    for rank in (1, 2, 3):
        xi = random_seed(dec3, rank, rng) if rank > 1 else None
        if xi is None:
            v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            v *= np.sqrt(3) / np.linalg.norm(v)
            xi = np.outer(v, v.conj())
        describe(f"Weyl-Heisenberg d=3, rank {rank}", PovmSeed(xi, dec3))

    # best phase estimate for the uniform superposition on two levels
    dec2 = isotypic_decompose(U1Weights([0, 1]))
    u = np.ones(2) / np.sqrt(2)
    res = maximize_linear(np.outer(u, u), ConvexSetSpec.povm(dec2), restarts=1)
    print(f"\nmax Tr[W Xi] for W = |e><e|, e = (1,1)/sqrt2: {res.value:.10f} (extremal = {res.extremal})")


if __name__ == "__main__":
    main()
