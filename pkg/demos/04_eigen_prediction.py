"""
Labels along the top eigenvector are learned first
==================================================

With a small initialization the training residual follows the kernel
prediction sqrt(sum_i (1 - eta lambda_i)^{2k} (v_i . y)^2).  Labels aligned
with the largest eigenvalue decay fastest; random labels spread their mass
over slow directions.
"""

import sys

from overparam import experiments

out = sys.argv[1] if len(sys.argv) > 1 else "demo_runs/eigen"
rep = experiments.run(experiments.preset("eigen-prediction"))
experiments.write_report(rep, out)

print(rep.summary["eta_source"])
for name in ("top", "random"):
    meas = [v ** 0.5 for v in rep.traces[name].loss_sq]
    pred = rep.predictions[name].values
    cols = "  ".join(f"k={k}: {meas[k]:.2e}/{pred[k]:.2e}" for k in (0, 5, 20, 100))
    print(f"{name:>6}  {cols}  (measured/predicted)")
for v in rep.verdicts:
    print(("PASS" if v.passed else "FAIL"), v.check, round(v.measured, 5))
