"""Random backward walks vs their exact cylinder masses.

Draws paths on the weighted full 2-shift and compares depth-3 label
frequencies against the exact tree integrals.  The sampler is counter
based, so path i is the same no matter how many other paths you draw.
"""

import sys
from collections import Counter

from branchwalk import (Subshift, SymbolTable, derive_delta, label_indicator,
                        path_integral, sample_path)
from branchwalk import exactnum as xn

N_PATHS = int(sys.argv[1]) if len(sys.argv) > 1 else 20000
SEED = 7

shift = Subshift(((1, 1), (1, 1)))
delta = derive_delta(shift, SymbolTable(("3/2", "1/2")), "subshift-perron",
                     rescale=True)
root = (0,) * 6

counts = Counter()
for i in range(N_PATHS):
    p = sample_path(shift, delta, root, 3, seed=SEED, index=i)
    counts[p.labels] += 1

print(f"{N_PATHS} backward paths of depth 3 from {''.join(map(str, root))}")
print(f"{'labels':>8} {'exact':>12} {'sampled':>12} {'z':>7}")
for w in shift.words(3):
    mass = xn.to_float(path_integral(shift, delta, root,
                                     label_indicator(w), 3))
    freq = counts[w] / N_PATHS
    sigma = (mass * (1 - mass) / N_PATHS) ** 0.5
    z = (freq - mass) / sigma
    bar = "#" * round(40 * freq)
    print(f"{''.join(map(str, w)):>8} {mass:12.6f} {freq:12.6f} {z:7.2f}  "
          f"{bar}")

# reproducibility: re-drawing path 123 gives the identical object
a = sample_path(shift, delta, root, 3, seed=SEED, index=123)
b = sample_path(shift, delta, root, 3, seed=SEED, index=123)
print("\npath 123 redrawn identically:", a == b, "-", a.labels)
