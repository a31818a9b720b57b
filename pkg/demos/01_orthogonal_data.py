"""
Orthogonal inputs: the one case where every constant is known
==============================================================

With orthonormal inputs the continuous Gram matrix is exactly half the
identity, and every single-neuron Gram matrix is diagonal with 0/1 entries.
This script checks both facts and prints the derived step size and width.
"""

import numpy as np

from overparam import estimate_constants, gen_orthogonal, hcts_matrix, theory

ds = gen_orthogonal(8, seed=0)
H = hcts_matrix(ds.X)
print("H^cts - I/2, largest entry:", np.abs(H - 0.5 * np.eye(8)).max())

# a handful of weight draws is enough; the answer does not depend on M
c = estimate_constants(ds.X, M=10, seed=0)
print("lambda, alpha, beta, theta =", c.lam, c.alpha, c.beta_var, c.theta)

for variant in ("quartic", "cubic", "quadratic", "regularized"):
    eta = theory.step_size(variant, c, ds.n)
    R = theory.radius_R(variant, c, ds.n)
    m_req = theory.required_width(variant, c, ds.n, delta=0.1)
    print(f"{variant:>11}: eta={eta:.4g}  R={R:.4g}  width~{m_req:.3g}")
