"""Certified contraction of the transport distance along a circle diffusion.

We take the discretized diffusion on the circle, minimize the action between
two smooth densities, push the whole minimizing path through the semigroup,
and recompute its action.  The pushed path is exactly feasible (the heat
flow commutes with the generator), so the recomputed action is a certified
upper bound on the evolved distance -- the contraction report needs no trust
in the optimizer.
"""

import numpy as np

from markov_transport import (
    circle_diffusion,
    estimate_best_R,
    verify_thm44_contraction,
)

m = 64
tri = circle_diffusion(m)
x = np.arange(m) / m
f = 1.0 + 0.3 * np.cos(2 * np.pi * x)
g = 1.0 - 0.25 * np.sin(2 * np.pi * x)
f /= tri.measure @ f
g /= tri.measure @ g

# flat circle: zero curvature, dimension one
for T in (0.05, 0.1, 0.2):
    rep = verify_thm44_contraction(tri, f, g, R=0.0, n=1.0, T=T, K=32)
    print(f"T = {T:4.2f}: action(pushed) = {rep.lhs:.6e}  "
          f"bound = {rep.rhs:.6e}  margin = {rep.margin:+.3e}  "
          f"pass = {rep.passed}")
    print(f"          base action {rep.extras['base_action']:.6e}, "
          f"dimensional correction {rep.extras['correction']:.3e}")

best_R = estimate_best_R(tri, n=np.inf, sample_count=32, seed=0)
print(f"\nsampled curvature upper estimate on this chain: R <= {best_R:.4f}")
print("(compare with the continuum circle, which is flat: R = 0)")
