"""Fixed functions of the doubling-map transfer operator, two filters.

Flat two-tap filter: branch weights are identically 1/2, the iteration
is done after one step and h == 1.  Stretched four-tap filter
(1/sqrt2, 0, 0, 1/sqrt2): the weight 1 + cos(6 pi x) vanishes at 1/6,
1/2, 5/6 and the points {1/3, 2/3} form a backward-absorbing 2-cycle,
so a genuinely nonconstant fixed function appears.  Its closed form is
h(x) = (3 + 4 cos 2pi x + 2 cos 4pi x)/3.
"""

import numpy as np

from branchwalk import CircleMap, FilterSquared, GridDensity, derive_delta, \
    fixed_point_h

S = 1 / np.sqrt(2)
sys = CircleMap(2)

for label, taps in (("flat", (S, S)), ("stretched", (S, 0.0, 0.0, S))):
    delta = derive_delta(sys, FilterSquared(taps), "strongly-invariant")
    grid = 12288  # multiple of 3: the 2-cycle sits exactly on nodes
    mu0 = GridDensity(grid)
    res = fixed_point_h(sys, delta, grid=grid, tol=1e-8,
                        max_iterations=2000, mu0=mu0)
    print(f"{label} filter: residual {res.residual:.3e} "
          f"after {res.iterations} iterations ({res.selection})")
    print(f"  sup |h - 1| = {np.max(np.abs(res.values - 1)):.3e}")
    for x in (0.0, 1/6, 1/3, 1/2, 2/3):
        print(f"  h({x:.4f}) = {res.at(x): .10f}")
    if label == "stretched":
        xs = res.grid
        closed = (3 + 4*np.cos(2*np.pi*xs) + 2*np.cos(4*np.pi*xs)) / 3
        print(f"  closed-form sup error = "
              f"{np.max(np.abs(res.values - closed)):.3e}")
    print()
