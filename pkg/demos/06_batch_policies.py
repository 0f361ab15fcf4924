"""
Batch execution policies
========================

A batch run takes a pile of circuits and a routing policy.  Fixed policies
always use the same backend family; the auto policy prices every circuit
with the calibrated model and routes each one to the cheapest feasible
backend.  The report keeps per-circuit wall time, the chosen backend, and
the prediction overhead.
"""

from collections import Counter

from polysim import suite
from polysim.batch import run_batch
from polysim.calibration import calibrate

circuits = suite.generate_torture_suite(seed=0, per_family=8)
print(f"{len(circuits)} circuits spanning clifford, low-entanglement, "
      "and dense families")

model = calibrate(seed=0)
SHOTS = 200

for policy in ("fixed-mps", "fixed-sv-threshold", "auto"):
    report = run_batch(circuits, policy, model=model, shots=SHOTS, seed=0)
    routed = Counter(r.backend for r in report.records if r.backend)
    mix = ", ".join(f"{b}:{k}" for b, k in sorted(routed.items()))
    line = f"  {policy:<20} wall={report.wall_seconds:7.3f}s  routed {mix}"
    if policy == "auto":
        line += f"  (prediction {report.prediction_seconds:.3f}s)"
    print(line)
