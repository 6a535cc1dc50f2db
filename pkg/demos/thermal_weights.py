"""Rotational populations of a cold OCS beam.

Prints the Boltzmann weight of each J manifold (all M summed) for a few
beam temperatures, and shows how a too-small basis cut is rejected.
"""

from mixedfield.thermal import TruncationError, weights
from mixedfield.units import OCS

print(f"{'T (K)':>6}" + "".join(f"{'J=' + str(J):>9}" for J in range(5)))
for T in (0.1, 0.29, 0.46, 0.65, 1.0):
    w = weights(T, OCS, j_cut=9).manifold
    print(f"{T:6.2f}" + "".join(f"{x:9.4f}" for x in w[:5]))

# at 1 K the J <= 3 manifolds miss too much population
try:
    weights(1.0, OCS, j_cut=3)
except TruncationError as exc:
    print("rejected:", exc)
