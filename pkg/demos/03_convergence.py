"""
Gradient descent against the linear-rate bound
==============================================

Train the first layer on orthogonal data with the step size from the
quartic analysis and overlay the measured loss on the geometric bound.
The run directory can be rendered with ``overparam report``.
"""

import sys

import numpy as np

from overparam import experiments

out = sys.argv[1] if len(sys.argv) > 1 else "demo_runs/convergence"
rep = experiments.run(experiments.preset("convergence"))
experiments.write_report(rep, out)

loss = np.array(rep.trace.loss_sq)
k, bound = rep.bounds["main"]
for step in (0, 50, 100, 150, 200):
    print(f"k={step:>3}  loss={loss[step]:.4f}  bound={bound[step]:.4f}")

# the step size is tiny, so after 200 steps we are still far from zero loss
print("final / initial loss:", loss[-1] / loss[0])
print("largest weight movement:", max(rep.trace.max_move), "vs radius R =", rep.summary["radius_R"])
for v in rep.verdicts:
    print(("PASS" if v.passed else "FAIL"), v.check, v.measured, v.threshold)
print("wrote", out)
