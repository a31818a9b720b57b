"""
How fast does the sampled Gram matrix approach the closed form?
===============================================================

The finite-width Gram matrix is an average of m i.i.d. single-neuron
matrices, so its Frobenius distance to the closed form should shrink like
1/sqrt(m).  We check the slope on a log-log scale.
"""

import numpy as np

from overparam import gen_gaussian_sphere
from overparam.concentration import gram_concentration_trial

ds = gen_gaussian_sphere(10, 20, seed=2)
widths = [250, 1000, 4000, 16000]
means = []
for m in widths:
    rep = gram_concentration_trial(ds.X, m, trials=20, seed=1)
    means.append(rep.values.mean())
    print(f"m={m:>6}  mean |H^dis - H^cts|_F = {means[-1]:.4f}   violations of lambda/4: {rep.violation_count}")

slope = np.polyfit(np.log(widths), np.log(means), 1)[0]
print(f"log-log slope {slope:.3f} (expect about -0.5)")
