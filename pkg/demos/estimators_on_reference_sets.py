"""Estimator values on the reference families, and how they scale.

Spikes concentrate all of their norm on shrinking supports, so nu sees the
full norm at any mass budget.  Disjoint indicators are pairwise sqrt(2)
apart in L_2, which is what the packing estimator reports.  A mixed ball
sample sits in between.
"""

from mnclab.estimators import Estimator, chi_hat, chi_oracle, verify_witness
from mnclab.sets import ball_sample, disjoint_indicator_family, explicit_set, scale_set, spike_family
from mnclab.space import make_uniform_space

space = make_uniform_space(1024)
sets = {
    "spikes": spike_family(space, 2.0, 10),
    "indicators": disjoint_indicator_family(space, 2.0, 16),
    "ball": ball_sample(space, 2.0, 1.0, 64, seed=0),
}
estimators = [Estimator("diameter"), Estimator("chi", 8), Estimator("beta", 8), Estimator("nu", 1 / 1024)]

print(f"{'set':<12}" + "".join(f"{e.label():>16}" for e in estimators))
for name, U in sets.items():
    print(f"{name:<12}" + "".join(f"{e(U):>16.6f}" for e in estimators))

# every value can be recomputed from its witness alone
U = sets["ball"]
for e in estimators:
    est = e.estimate(U)
    assert abs(verify_witness(U, est) - est.value) <= 1e-12 * max(est.value, 1.0)

# positive homogeneity is exact, witnesses included
for rho in (0.25, 4.0):
    a, b = Estimator("chi", 8).estimate(scale_set(U, rho)), Estimator("chi", 8).estimate(U)
    print(f"chi(8) at rho={rho:g}: {a.value:.6f} = {rho:g} * {b.value:.6f}, same centres: {a.witness == b.witness}")

# the greedy net against the exhaustive one on a small set
small = explicit_set(make_uniform_space(16), 2.0, ball_sample(make_uniform_space(16), 2.0, 1.0, 12, seed=5).values)
for N in (1, 2, 4):
    print(f"N={N}: greedy {chi_hat(small, N).value:.4f}, optimal {chi_oracle(small, N).value:.4f}")
