"""Derivatives, and telling compact-like linear maps from the identity.

The analytic derivative of a Hammerstein map is checked against central
differences, then the chi contrast of three linear maps is printed next to
the frozen threshold.  In finite dimensions every bounded set is compact,
so the contrast is a fixed-budget proxy: it separates the maps only while
the budget is much smaller than the sample and the sample much smaller than
the cell count.
"""

import numpy as np

from mnclab.analysis import CONTRAST_THRESHOLDS, complete_continuity_contrast
from mnclab.operators import Kernel, apply, frechet_analytic, hammerstein, identity, integral, remainder_ratio
from mnclab.sets import ball_sample, sphere_sample
from mnclab.space import Func, constant_func, make_uniform_space

space = make_uniform_space(1024)
H = hammerstein(Kernel.gaussian(space, 0.5), gamma=2.0)
u1 = constant_func(space, 1.0)
h = Func(space, np.cos(np.linspace(0, 6, 1024)), 2.0)
D = frechet_analytic(H, u1)
for eps in (1e-3, 1e-4):
    fd = (apply(H, u1 + eps * h).values - apply(H, u1 - eps * h).values) / (2 * eps)
    print(f"eps={eps:g}: max |central difference - H'(u1)h| = {np.abs(fd - D.apply(h).values).max():.2e}")

tab = remainder_ratio(H, u1, [2.0**-k for k in range(1, 11)], sphere_sample(space, 2.0, 1.0, 32, seed=1))
print("remainder ratio:", " ".join(f"{x:.2e}" for x in tab.ratios[::3]), "decays:", tab.decays())

print()
B = ball_sample(space, 2.0, 1.0, 512, seed=0)
budgets = [2, 4, 8, 16, 32]
tol = CONTRAST_THRESHOLDS["chi"]["ratio_tol"]
for name, L in [("identity", identity()), ("gaussian(0.02)", integral(Kernel.gaussian(space, 0.02))),
                ("rank-one", integral(Kernel.rank_one(space)))]:
    c = complete_continuity_contrast(L, budgets, B)
    print(f"{name:<15} " + " ".join(f"{r:.3f}" for r in c.ratios) + f"  -> {c.verdict} (threshold {tol:.3f})")
