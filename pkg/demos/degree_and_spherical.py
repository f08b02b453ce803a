"""Degree of a superposition operator and the spherical property.

F1(u) = sgn(u)|u|^(q/p) maps L_q to L_p.  Scaling the argument by rho scales
nu of the image by rho^(q/p), and a log-log fit recovers the exponent to
rounding.  The second half asks whether a positive nu on the image of a ball
is always visible on the image of some sphere inside it.
"""

from mnclab.analysis import check_spherical, estimate_degree, lemma1_check, standard_samples
from mnclab.estimators import Estimator
from mnclab.operators import Kernel, canonical_f1, hammerstein, identity, zero_operator
from mnclab.sets import ball_sample
from mnclab.space import make_uniform_space

space = make_uniform_space(1024)
nu = Estimator("nu", 1 / 1024)
rho = [2.0**k for k in range(-3, 4)]

for q, p in [(1.0, 2.0), (2.0, 2.0), (4.0, 2.0), (2.0, 1.0)]:
    d = estimate_degree(canonical_f1(1.0, q, p), nu, ball_sample(space, q, 1.0, 64, seed=0), rho)
    print(f"F1 L_{q:g} -> L_{p:g}: k_hat = {d.k_hat:.12f} (q/p = {q / p:g}), residual {d.residual:.1e}")

samples = standard_samples(space, 2.0, 64, seed=0)
peak_nu = Estimator("nu", 1 / 1024, peak=8.0)
grid = [2.0**-k for k in range(5, -1, -1)]
ops = {
    "F1": canonical_f1(1.0, 2.0, 2.0),
    "hammerstein": hammerstein(Kernel.gaussian(space, 0.1)),
    "zero": zero_operator(),
    "identity": identity(),
}
print()
for name, T in ops.items():
    r = check_spherical(peak_nu, T, 1.0, grid, samples)
    print(f"{name:<12} ball {r['ball_value']:.4f}  best sphere {r['best_sphere_value']:.4f}  "
          f"biconditional {r['biconditional_holds']}")

# a vanishing sphere image propagates to every radius for a homogeneous map
print()
for name in ("hammerstein", "F1"):
    r = lemma1_check(peak_nu, ops[name], 1.0, rho, samples)
    print(f"{name:<12} degree {r['degree']['k']}  {r['status']}")
