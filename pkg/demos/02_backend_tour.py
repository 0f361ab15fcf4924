"""
One circuit, four backends
==========================

Every backend returns the same RunResult shape, so swapping them is a one
word change.  On a circuit they can all express, the sampled distributions
agree up to shot noise.
"""

import numpy as np

from polysim import mps, pblock, stabilizer, statevector
from polysim.circuit import Circuit

# A Clifford circuit so the tableau backend can join the comparison.
rng = np.random.default_rng(4)
c = Circuit(5, name="mixer")
c.gate("h", 0)
for q in range(4):
    c.gate("cx", q, q + 1)
c.gate("s", 2)
c.gate("h", 3)
c.gate("cz", 1, 3)
c.measure_all()

SHOTS = 20_000
runs = {
    "sv": statevector.run(c, SHOTS, seed=1),
    "mps": mps.run(c, SHOTS, seed=1, chi_max=16),
    "stab": stabilizer.run(c, SHOTS, seed=1),
    "pblock": pblock.run(c, SHOTS, seed=1),
}

outcomes = sorted(set().union(*(r.counts for r in runs.values())))
header = "outcome  " + "".join(f"{name:>8}" for name in runs)
print(header)
print("-" * len(header))
for bits in outcomes:
    row = "".join(f"{runs[name].counts.get(bits, 0):>8}" for name in runs)
    print(f"{bits}  {row}")

print("\nwall seconds per backend:")
for name, r in runs.items():
    print(f"  {name:<7} {r.wall_time:.4f}")
