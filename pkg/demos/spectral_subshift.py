"""Exact spectral data for the two bundled subshifts.

The golden-mean graph (no two consecutive 1s) has adjacency eigenvalue
(1+sqrt(5))/2 and the flat weight rescales to branch densities
[1/lam, 1; 1/lam^2, 0].  The weighted full shift starts at spectral
radius 2 and lands on the Bernoulli(3/4, 1/4) densities.  Everything
below is rational/algebraic arithmetic end to end — the printed
discrepancies are exact zeros, not small floats.
"""

import sympy as sp

from branchwalk import (
    Subshift, SymbolTable, derive_delta, perron_fixed_measure,
    transfer_apply, exactnum as xn,
)


def show(system, weights, label):
    print(f"--- {label} ---")
    delta = derive_delta(system, SymbolTable(weights), "subshift-perron",
                         rescale=True)
    pd = delta.perron
    print("raw eigenvalue      :", sp.nsimplify(pd.eigenvalue))
    print("scaled eigenvalue   :", pd.eigenvalue_scaled)
    print("branch density table:")
    for i, row in enumerate(delta.table):
        cells = "  ".join(f"{sp.nsimplify(v)!s:>14}" for v in row)
        print(f"   from {i}: {cells}")

    mu = perron_fixed_measure(system, delta, depth=4)
    print("cylinder masses at depth 1 and 2:")
    for d in (1, 2):
        for w, m in sorted(mu.level(d).items()):
            word = "".join(map(str, w))
            print(f"   [{word}]  {sp.nsimplify(m)}  =  {xn.to_float(m):.12f}")

    # the operator fixes constants: R 1 = 1 exactly, at every base word
    worst = max(
        (transfer_apply(system, delta, lambda y: sp.Integer(1), w) - 1
         for w in system.words(3)),
        key=lambda e: abs(xn.to_float(e)))
    print("max |R1 - 1| over depth-3 words:", xn.canon(worst))
    print()


if __name__ == "__main__":
    show(Subshift(((1, 1), (1, 0))), ("1", "1"), "golden-mean shift")
    show(Subshift(((1, 1), (1, 1))), ("3/2", "1/2"), "weighted full 2-shift")
