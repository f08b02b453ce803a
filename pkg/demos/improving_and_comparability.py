"""Improving operators and pointwise comparability.

An operator is improving when it maps bounded sets to equi-integrable ones,
so nu of every image vanishes as the mass budget shrinks.  The test suite
needs a spike-rich set, otherwise a non-improving map can pass by accident.
"""

from mnclab.analysis import comparability_check, improving_check
from mnclab.operators import Kernel, canonical_f1, hammerstein, identity, integral, scalar_multiple
from mnclab.sets import ball_sample, smooth_family, spike_family
from mnclab.space import constant_func, make_uniform_space

space = make_uniform_space(1024)
suite = [spike_family(space, 2.0, 10), ball_sample(space, 2.0, 1.0, 64, seed=0), smooth_family(space, 2.0, 1.0, 16, seed=3)]

for name, T in [("identity", identity()), ("F1", canonical_f1(1.0, 2.0, 2.0)),
                ("hammerstein", hammerstein(Kernel.gaussian(space, 0.1))),
                ("rank-one", integral(Kernel.rank_one(space)))]:
    r = improving_check(T, suite)
    print(f"{name:<12} {r['verdict']:<14} nu at the smallest delta {r['plateau']:.3g}")

print()
F1 = canonical_f1(1.0, 2.0, 2.0)
U = suite[1]
zero = constant_func(space, 0.0)
for c in (0.5, 2.0):
    r = comparability_check(scalar_multiple(c, F1), F1, zero, U, 1 / 1024)
    if r["pointwise_domination_holds"]:
        print(f"{c:g}*F1: dominated, nu {r['nu_F']:.4f} <= {r['nu_F1']:.4f} + {r['b1_correction']:g}")
    else:
        w = r["witness"]
        print(f"{c:g}*F1: domination fails at member {w['member']}, cell {w['cell']} ({w['lhs']:.3g} > {w['rhs']:.3g})")
