import numpy as np
import pytest

from mnclab.errors import InvalidArgument
from mnclab.estimators import nu_hat, pairwise_distances
from mnclab.sets import (
    GeneratorSpec,
    annulus_sample,
    ball_sample,
    build,
    constant_set,
    disjoint_indicator_family,
    explicit_set,
    scale_set,
    smooth_family,
    sphere_sample,
    spike_family,
    sum_sets,
    translate_set,
    union_sets,
)
from mnclab.space import constant_func, make_uniform_space


def test_spike_family(space):
    U = spike_family(space, 2.0, 10)
    assert len(U) == 10
    assert np.all(U.norms() == 1.0)
    supports = [(U.values[i] != 0).sum() / 1024 for i in range(10)]
    assert supports == [2.0**-k for k in range(1, 11)]
    assert nu_hat(U, 1 / 1024).value == 1.0
    small = spike_family(make_uniform_space(4), 1.0, 2)
    assert small.norms().tolist() == [1.0, 1.0]
    with pytest.raises(InvalidArgument):
        spike_family(space, 2.0, 11)


def test_indicator_family():
    s = make_uniform_space(1024)
    d = pairwise_distances(disjoint_indicator_family(s, 2.0, 8))
    off = d[~np.eye(8, dtype=bool)]
    assert np.allclose(off, np.sqrt(2), rtol=1e-15, atol=0)
    d1 = pairwise_distances(disjoint_indicator_family(s, 1.0, 3))
    assert np.all(d1[~np.eye(3, dtype=bool)] == 2.0)
    with pytest.raises(InvalidArgument):
        disjoint_indicator_family(make_uniform_space(4), 2.0, 5)


def test_ball_sample_contract(space):
    B = ball_sample(space, 2.0, 3.0, 64, 5)
    assert B.norms().max() <= 3.0 + 1e-12
    assert np.all(B.norms() > 0)
    assert B.identical_to(ball_sample(space, 2.0, 3.0, 64, 5))
    assert not B.identical_to(ball_sample(space, 2.0, 3.0, 64, 6))
    spiky = ball_sample(space, 2.0, 1.0, 16, 1, mixture="spike")
    assert nu_hat(spiky, 1 / 1024).value == 1.0


def test_ball_scaling_is_the_last_step(space):
    a = ball_sample(space, 2.0, 0.25, 32, 9)
    b = scale_set(ball_sample(space, 2.0, 1.0, 32, 9), 0.25)
    assert a.values.tobytes() == b.values.tobytes()


@pytest.mark.parametrize("mixture", [{"spike": -1, "smooth": 1, "uniform": 1}, {"bogus": 1.0}, [1, 2], "wiggly"])
def test_bad_mixture(space, mixture):
    with pytest.raises(InvalidArgument):
        ball_sample(space, 2.0, 1.0, 8, 0, mixture)


def test_seed_required(space):
    with pytest.raises(InvalidArgument):
        ball_sample(space, 2.0, 1.0, 8, None)


def test_sphere_sample(space):
    S = sphere_sample(space, 2.0, 2.0, 48, 3)
    assert np.allclose(S.norms(), 2.0, rtol=1e-12, atol=0)
    S1 = sphere_sample(space, 2.0, 1.0, 48, 3)
    assert np.max(np.abs(S.values - scale_set(S1, 2.0).values)) <= 1e-15
    one = sphere_sample(space, 2.0, 0.5, 1, 0, mixture="spike")
    assert one.norms()[0] == 0.5 and (one.values[0] != 0).sum() == 1


def test_annulus_sample(space):
    A = annulus_sample(space, 2.0, 1.0, 2.0, 64, 4)
    n = A.norms()
    assert np.all(n > 1.0) and np.all(n <= 2.0)
    thin = annulus_sample(space, 2.0, 1.0, 1.0 + 1e-9, 16, 4)
    tn = thin.norms()
    assert np.all(tn > 1.0) and np.all(tn <= 1.0 + 1e-9)
    assert A.identical_to(annulus_sample(space, 2.0, 1.0, 2.0, 64, 4))
    with pytest.raises(InvalidArgument):
        annulus_sample(space, 2.0, 2.0, 1.0, 4, 0)


def test_set_algebra(space, ball):
    assert scale_set(ball, 1) is ball
    assert not np.any(scale_set(ball, 0).values)
    C = constant_set(space, 2.0, [0.0, 1.0, 2.0])
    assert len(sum_sets(ball, C)) == len(ball) * 3
    assert len(union_sets(ball, C)) == len(ball) + 3
    ab = scale_set(scale_set(ball, 0.3), 7.0)
    np.testing.assert_allclose(ab.values, scale_set(ball, 2.1).values, rtol=4e-16, atol=1e-15)
    T = translate_set(C, constant_func(space, 1.0))
    assert np.all(T.values[:, 0] == [1.0, 2.0, 3.0])
    other = constant_set(make_uniform_space(1024, 2.0), 2.0, [1.0])
    with pytest.raises(InvalidArgument):
        union_sets(C, other)
    with pytest.raises(InvalidArgument):
        sum_sets(C, constant_set(space, 1.0, [1.0]))


@pytest.mark.parametrize(
    "spec",
    [
        {"kind": "spike", "params": {"p": 2.0, "count": 6}},
        {"kind": "ball-mixture", "params": {"p": 2.0, "radius": 1.5, "count": 20, "seed": 1}},
        {"kind": "sphere", "params": {"p": 1.0, "radius": 1.0, "count": 20, "seed": 2}},
        {"kind": "annulus", "params": {"p": 2.0, "r_inner": 1.0, "r_outer": 2.0, "count": 20, "seed": 3}},
        {"kind": "smooth-random", "params": {"p": 2.0, "count": 5, "seed": 4}},
    ],
)
def test_regeneration_is_byte_exact(space, spec):
    U = build(spec, space)
    V = build(U.provenance, space)
    assert U.identical_to(V)
    assert U.provenance == GeneratorSpec.from_dict(U.provenance.to_dict())


def test_derived_provenance_regenerates(space, ball):
    C = constant_set(space, 2.0, [1.0, -1.0])
    W = union_sets(scale_set(ball, 0.5), sum_sets(C, C))
    assert W.identical_to(build(W.provenance, space))


def test_smooth_family_is_bounded(space):
    U = smooth_family(space, 2.0, 1.0, 8, 0)
    assert U.norms().max() <= 1.0 + 1e-12
    assert np.abs(U.values).max() < 10


def test_explicit_set():
    s = make_uniform_space(3)
    U = explicit_set(s, 2.0, [1.0, 2.0, 3.0])
    assert len(U) == 1 and U.provenance.kind == "singleton"
    with pytest.raises(InvalidArgument):
        explicit_set(s, 2.0, [[1.0, np.nan, 0.0]])
