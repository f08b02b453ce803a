import numpy as np
import pytest

from mnclab.errors import InvalidArgument, NonDifferentiable, NumericOverflow
from mnclab.operators import (
    Kernel,
    apply,
    apply_set,
    asymptotic_remainder_ratio,
    frechet_analytic,
    general_superposition,
    hammerstein,
    identity,
    integral,
    is_linear_numerically,
    linear_part,
    multiplier,
    norm_weighted,
    operator_from_dict,
    canonical_f1,
    power_superposition,
    remainder_ratio,
    scalar_multiple,
    shift_argument,
    subtract_value,
    sum_op,
    zero_operator,
)
from mnclab.sets import ball_sample, build, sphere_sample, spike_family
from mnclab.space import Func, constant_func, lp_norm, make_uniform_space


@pytest.fixture(scope="module")
def s64():
    return make_uniform_space(64)


def _rand(space, seed, p=2.0):
    rng = np.random.default_rng(seed)
    return Func(space, rng.random(space.cell_count) * 2 - 1, p)


def test_power_superposition_values(s64):
    sq = power_superposition(1.0, 2.0)
    assert np.all(apply(sq, constant_func(s64, -2.0)).values == -4.0)
    assert np.all(apply(sq, constant_func(s64, 0.0)).values == 0.0)
    root = power_superposition(2.0, 0.5)
    assert np.all(apply(root, constant_func(s64, 4.0)).values == 4.0)
    with pytest.raises(InvalidArgument):
        power_superposition(-1.0, 2.0)
    with pytest.raises(InvalidArgument):
        power_superposition(1.0, 0.0)


def test_f1_maps_norm_to_power(space):
    F = canonical_f1(1.0, 4.0, 2.0)
    u = spike_family(space, 4.0, 3).member(2)
    assert lp_norm(apply(F, u)) == pytest.approx(1.0, rel=1e-12)
    v = Func(space, _rand(space, 1).values, 4.0)
    assert lp_norm(apply(F, v)) == pytest.approx(lp_norm(v) ** 2, rel=1e-12)
    with pytest.raises(InvalidArgument):
        power_superposition(1.0, 3.0, 4.0, 2.0, tag="canonical-F1")


def test_domain_exponent_is_checked(s64):
    with pytest.raises(InvalidArgument):
        apply(canonical_f1(1.0, 4.0, 2.0), constant_func(s64, 1.0, p=2.0))
    with pytest.raises(InvalidArgument):
        sum_op(identity(2.0), canonical_f1(1.0, 4.0, 2.0))


def test_integral_and_hammerstein(s64):
    K = Kernel.constant(s64, 1.0)
    two = constant_func(s64, 2.0)
    assert np.allclose(apply(integral(K), two).values, 2.0, rtol=1e-14)
    H = hammerstein(K, a=1.0, gamma=2.0)
    assert np.allclose(apply(H, two).values, 4.0, rtol=1e-14)
    assert np.allclose(apply(H, constant_func(s64, -2.0)).values, -4.0, rtol=1e-14)
    R = Kernel.rank_one(s64, np.arange(64.0), None)
    out = apply(integral(R), constant_func(s64, 1.0)).values
    assert np.allclose(out, np.arange(64.0), rtol=1e-14)
    with pytest.raises(InvalidArgument):
        Kernel(np.ones((2, 3)))
    with pytest.raises(InvalidArgument):
        apply(integral(K), constant_func(make_uniform_space(8), 1.0))
    with pytest.raises(InvalidArgument):
        Kernel.from_spec({"generator": "spline"}, s64)
    with pytest.raises(InvalidArgument):
        Kernel.from_spec({"matrix": np.eye(8).tolist()}, s64)


def test_norm_weighted(s64):
    u = _rand(s64, 2)
    n = lp_norm(u)
    out = apply(norm_weighted(-0.5), u)
    assert np.allclose(out.values, n**-0.5 * u.values, rtol=1e-14)
    assert np.all(apply(norm_weighted(-0.5), constant_func(s64, 0.0)).values == 0.0)
    assert norm_weighted(-0.5).declared_degree() == 0.5


def test_combinators(s64):
    u = _rand(s64, 3)
    T = sum_op(identity(), scalar_multiple(3.0, power_superposition(1.0, 2.0)))
    assert np.allclose(apply(T, u).values, u.values + 3 * u.values * np.abs(u.values), rtol=1e-14)
    assert (identity() + identity()).kind == "sum"
    assert (2.0 * identity()).kind == "scalar_multiple"
    a = constant_func(s64, 1.0)
    S = shift_argument(power_superposition(1.0, 2.0), a)
    assert np.allclose(apply(S, u).values, (u.values + 1) * np.abs(u.values + 1), rtol=1e-14)
    V = subtract_value(identity(), a)
    assert np.allclose(apply(V, u).values, u.values - 1, rtol=0, atol=1e-15)
    assert scalar_multiple(0.0, identity()).is_zero
    assert linear_part(T).kind == "identity"


def test_linearity_flags(s64):
    lin = [identity(), integral(Kernel.gaussian(s64, 0.1)), multiplier(np.ones(64)), zero_operator(), 0.0 * canonical_f1(1, 2, 2)]
    nonlin = [power_superposition(1.0, 2.0), norm_weighted(0.5), hammerstein(Kernel.constant(s64), gamma=3.0)]
    for T in lin:
        assert T.linear and is_linear_numerically(T, s64)
    for T in nonlin:
        assert not T.linear and not is_linear_numerically(T, s64)


def test_derivative_of_square(s64):
    D = frechet_analytic(power_superposition(1.0, 2.0), constant_func(s64, 3.0))
    assert np.allclose(np.asarray(D.linear_op.weights), 6.0)
    assert np.allclose(D.apply(constant_func(s64, 1.0)).values, 6.0)


@pytest.mark.parametrize(
    "make",
    [
        lambda s: power_superposition(1.0, 3.0),
        lambda s: hammerstein(Kernel.gaussian(s, 0.2), a=1.0, gamma=2.0),
        lambda s: norm_weighted(0.5),
        lambda s: norm_weighted(-0.5, power_superposition(1.0, 2.0)),
        lambda s: sum_op(identity(), scalar_multiple(2.0, power_superposition(1.0, 1.5))),
        lambda s: shift_argument(power_superposition(1.0, 2.0), constant_func(s, 0.5)),
    ],
)
def test_analytic_matches_finite_differences(s64, make):
    T = make(s64)
    u1 = Func(s64, _rand(s64, 4).values + 2.0, 2.0)
    h = _rand(s64, 5)
    D = frechet_analytic(T, u1)
    errs = []
    for eps in (1e-3, 1e-4):
        fd = (apply(T, u1 + eps * h).values - apply(T, u1 - eps * h).values) / (2 * eps)
        errs.append(np.abs(fd - D.apply(h).values).max())
    scale = np.abs(D.apply(h).values).max()
    assert errs[1] <= 1e-6 * max(scale, 1.0)


def test_non_differentiable(s64):
    root = power_superposition(1.0, 0.5)
    u1 = Func(s64, np.r_[0.0, np.ones(63)], 2.0)
    with pytest.raises(NonDifferentiable) as exc:
        frechet_analytic(root, u1)
    assert exc.value.cell == 0
    with pytest.raises(NonDifferentiable):
        frechet_analytic(norm_weighted(-0.5), constant_func(s64, 0.0))
    with pytest.raises(NonDifferentiable):
        frechet_analytic(general_superposition(np.sin), constant_func(s64, 0.0))


def test_remainder_tables(s64):
    u1 = constant_func(s64, 1.0)
    sph = sphere_sample(s64, 2.0, 1.0, 16, 0, mixture="smooth")
    radii = [2.0**-k for k in range(1, 12)]
    sq = remainder_ratio(power_superposition(1.0, 2.0), u1, radii, sph)
    assert sq.decays()
    # remainder of u^2 at 1 is h|h|-ish: ratio is linear in r
    assert sq.ratios[-1] / sq.ratios[-2] == pytest.approx(0.5, rel=1e-3)
    lin = remainder_ratio(integral(Kernel.rank_one(s64)), u1, radii, sph)
    assert max(lin.ratios) <= 1e-9 and lin.decays()
    assert sq.table()["columns"] == ["radius", "remainder_ratio"]


def test_asymptotic_remainder(s64):
    sph = sphere_sample(s64, 2.0, 1.0, 16, 0)
    T = sum_op(integral(Kernel.rank_one(s64)), norm_weighted(-0.5))
    tab = asymptotic_remainder_ratio(T, [2.0**k for k in range(0, 12)], sph)
    assert tab.decays() and tab.mode == "infinity"
    with pytest.raises(InvalidArgument):
        asymptotic_remainder_ratio(T, [4.0, 2.0, 1.0], sph)
    with pytest.raises(InvalidArgument):
        linear_part(power_superposition(1.0, 2.0))


def test_overflow_is_reported(s64):
    big = power_superposition(1.0, 400.0)
    with pytest.raises(NumericOverflow) as exc:
        apply(big, Func(s64, np.r_[np.ones(5), 1e3, np.ones(58)], 2.0))
    assert exc.value.cell == 5


@pytest.mark.parametrize(
    "d",
    [
        {"kind": "f1", "a": 1.0, "q": 4.0, "p": 2.0},
        {"kind": "hammerstein", "kernel": {"generator": "gaussian", "width": 0.1}, "a": 1.0, "gamma": 2.0},
        {"kind": "integral", "kernel": {"generator": "rank-one", "phi": "ones", "psi": "ones"}},
        {"kind": "sum", "children": [{"kind": "identity"}, {"kind": "norm_weighted", "alpha": -0.5}]},
        {"kind": "scalar_multiple", "c": 0.5, "children": [{"kind": "f1", "q": 2.0, "p": 2.0}]},
        {"kind": "subtract_value", "value": -0.5, "children": [{"kind": "f1", "q": 2.0, "p": 2.0}]},
        {"kind": "shift_argument", "anchor": 1.0, "children": [{"kind": "power_superposition", "gamma": 2.0}]},
    ],
)
def test_operator_round_trip(s64, d):
    T = operator_from_dict(d, s64)
    T2 = operator_from_dict(T.to_dict(), s64)
    u = _rand(s64, 6, T.q)
    assert np.array_equal(apply(T, u).values, apply(T2, u).values)


def test_image_provenance_rebuilds(s64):
    T = hammerstein(Kernel.gaussian(s64, 0.1), gamma=2.0)
    img = apply_set(T, ball_sample(s64, 2.0, 1.0, 8, 0))
    assert img.identical_to(build(img.provenance, s64))


def test_unknown_operator(s64):
    with pytest.raises(InvalidArgument):
        operator_from_dict({"kind": "mystery"}, s64)
    with pytest.raises(InvalidArgument):
        operator_from_dict({"kind": "sum", "children": ["T1", "T2"]}, s64)
