"""Condensing rates near a point and near infinity.

For u -> ||u||^alpha u the rate psi(f(U_r)) / psi(U_r) is exactly r^alpha,
which makes these maps a ruler for the rate verdicts.  The second part
splits a map as A1 + A0 (A1 homogeneous, A0 strongly condensing) and checks
that the three class verdicts agree.
"""

from mnclab.analysis import classify_theorem1, condensing_rate, standard_samples
from mnclab.estimators import Estimator
from mnclab.operators import Kernel, canonical_f1, hammerstein, integral, norm_weighted
from mnclab.space import constant_func, make_uniform_space

space = make_uniform_space(1024)
samples = standard_samples(space, 2.0, 64, seed=0)
nu = Estimator("nu", 1 / 1024, peak=8.0)

near = [2.0**-k for k in range(1, 25)]
far = [2.0**k for k in range(0, 25)]
for alpha, mode, radii in [(0.5, "balls-at-point", near), (2.0, "balls-at-point", near),
                           (-0.5, "spheres-at-infinity", far)]:
    t = condensing_rate(norm_weighted(alpha), None, mode, nu, radii, samples)
    print(f"alpha={alpha:>4}: rate at r={radii[-1]:.3g} is {t.rates[-1]:.6g}  ({t.verdict})")

flat = condensing_rate(canonical_f1(1.0, 2.0, 2.0), None, "balls-at-point", nu, near[:12], samples)
print(f"F1: rates stay at {flat.rates[-1]:g}  ({flat.verdict})")

print()
A0 = norm_weighted(1.0, hammerstein(Kernel.gaussian(space, 0.1)))
radii, sphere = [2.0**-k for k in range(1, 13)], [2.0**k for k in range(-5, 1)]
cases = {
    "improving A1": (hammerstein(Kernel.gaussian(space, 0.1)), A0, constant_func(space, 1.0)),
    "F1 as A1": (canonical_f1(1.0, 2.0, 2.0), A0, None),
}
for name, (A1, A0_, u1) in cases.items():
    rep = classify_theorem1(A1, A0_, u1, nu, samples, radii, sphere)
    print(f"{name:<14} {rep.verdicts}  consistent={rep.consistent}")

rank1 = integral(Kernel.rank_one(space))
rep = classify_theorem1(rank1, norm_weighted(-0.5), "infinity", nu, samples, [2.0**k for k in range(0, 21)], sphere)
print(f"{'at infinity':<14} {rep.verdicts}  consistent={rep.consistent}")
