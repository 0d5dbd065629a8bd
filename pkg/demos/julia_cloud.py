"""Backward-orbit clouds of z -> z^2 + c, rendered to PGM.

For c = 0 the equilibrium cloud is the unit circle with uniform angle;
the script checks that via the Kolmogorov-Smirnov distance.  For
c = -1 (the basilica) it writes a raster you can open with any image
viewer.  No plotting dependencies, just bytes.
"""

import numpy as np

from branchwalk import QuadraticJulia, brolin_sample, moment_functions

n = 60000

# --- c = 0: the verifiable case ------------------------------------------
cloud = brolin_sample(0, n, seed=2026)
z = cloud.points
ang = (np.angle(z) / (2 * np.pi)) % 1.0
u = np.sort(ang)
k = np.arange(1, n + 1)
ks = float(np.max(np.maximum(k / n - u, u - (k - 1) / n)))
print(f"c=0: {n} points, max |z| = {np.max(np.abs(z)):.12f}")
print(f"     angular KS = {ks:.5f}  (iid uniform bound 1.63/sqrt(n) "
      f"= {1.63 / n ** 0.5:.5f})")
for name, f in moment_functions(2):
    print(f"     E {name:14s} = {cloud.expect(f): .6f}")

# --- c = -1: the picture ---------------------------------------------------
c = -1
sys = QuadraticJulia(c)
cloud = brolin_sample(sys, n, seed=3)
z = cloud.points
bound = sys.escape_radius * 1.05
print(f"\nc={c}: escape radius {sys.escape_radius:.6f}, "
      f"max |z| = {np.max(np.abs(z)):.6f}")

size = 400
img = np.zeros((size, size), dtype=np.int64)
ix = np.clip(((z.real + bound) / (2 * bound) * size).astype(int), 0, size - 1)
iy = np.clip(((z.imag + bound) / (2 * bound) * size).astype(int), 0, size - 1)
np.add.at(img, (iy, ix), 1)
img = (img / img.max() * 255).round().astype(np.uint8)[::-1]

with open("julia_cloud.pgm", "wb") as fh:
    fh.write(f"P5\n{size} {size}\n255\n".encode())
    fh.write(img.tobytes())
print(f"wrote julia_cloud.pgm ({size}x{size}, "
      f"{np.count_nonzero(img)} lit pixels)")
